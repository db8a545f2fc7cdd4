#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "trackscan/error.hpp"

namespace trackscan {

/// Median with the mid-mean rule for even counts. Takes its argument by value
/// because nth_element reorders it.
inline double median(std::vector<double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::InvalidArgument, "median of an empty set");
  }
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double median(std::span<const double> values) {
  return median(std::vector<double>(values.begin(), values.end()));
}

inline double mean(std::span<const double> values) {
  if (values.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

inline double mean_abs(std::span<const double> values) {
  if (values.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (double v : values) sum += std::abs(v);
  return sum / static_cast<double>(values.size());
}

inline double rms(std::span<const double> values) {
  if (values.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum / static_cast<double>(values.size()));
}

}  // namespace trackscan
