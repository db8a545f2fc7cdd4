#pragma once

#include <vector>

#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"
#include "trackscan/stats.hpp"

namespace trackscan {

/// Platform reference line from the two outer 1/8-width bands.
struct PlatformBaseline {
  double left_median = 0.0;
  double right_median = 0.0;
  double left_center = 0.0;   // column at the middle of the left band
  double right_center = 0.0;  // column at the middle of the right band

  /// Platform row at `column`, interpolated between the band centres and
  /// extrapolated beyond them.
  double at(double column) const noexcept {
    const double span = right_center - left_center;
    if (span == 0.0) {
      return 0.5 * (left_median + right_median);
    }
    const double t = (column - left_center) / span;
    return left_median + t * (right_median - left_median);
  }
};

inline int platform_band_width(int columns) noexcept { return columns / 8; }

/// Valid subpixel rows of the columns in [first, last).
inline std::vector<double> valid_rows(const LaserProfile& profile, int first, int last) {
  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(last - first));
  for (int c = first; c < last; ++c) {
    if (profile.is_valid(c)) rows.push_back(profile.row(c));
  }
  return rows;
}

inline PlatformBaseline detect_platform(const LaserProfile& profile) {
  const int width = profile.columns();
  const int band = platform_band_width(width);
  if (band < 1) {
    throw Error(ErrorCode::InvalidArgument, "profile too narrow for platform bands");
  }
  const auto left = valid_rows(profile, 0, band);
  const auto right = valid_rows(profile, width - band, width);
  if (left.empty() || right.empty()) {
    throw Error(ErrorCode::NoPlatformSignal,
                left.empty() ? "no valid laser columns in the left platform band"
                             : "no valid laser columns in the right platform band");
  }

  PlatformBaseline baseline;
  baseline.left_median = median(left);
  baseline.right_median = median(right);
  baseline.left_center = 0.5 * static_cast<double>(band - 1);
  baseline.right_center = static_cast<double>(width - band) + 0.5 * static_cast<double>(band - 1);
  return baseline;
}

}  // namespace trackscan
