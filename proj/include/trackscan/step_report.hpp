#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "trackscan/error.hpp"

namespace trackscan {

struct StepRow {
  double reference_mm = 0.0;
  double measured_mm = 0.0;
  double deviation_mm = 0.0;  // measured - reference
};

struct StepReport {
  std::vector<StepRow> rows;
  double max_abs_deviation_mm = 0.0;
};

inline StepReport step_height_report(std::span<const double> measured_heights_mm,
                                     std::span<const double> reference_heights_mm) {
  if (measured_heights_mm.size() != reference_heights_mm.size()) {
    throw Error(ErrorCode::LengthMismatch, "measured and reference step lists differ in length");
  }
  if (measured_heights_mm.empty()) {
    throw Error(ErrorCode::InvalidArgument, "step lists are empty");
  }
  StepReport report;
  for (std::size_t i = 0; i < measured_heights_mm.size(); ++i) {
    StepRow row{reference_heights_mm[i], measured_heights_mm[i], measured_heights_mm[i] - reference_heights_mm[i]};
    report.max_abs_deviation_mm = std::max(report.max_abs_deviation_mm, std::abs(row.deviation_mm));
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace trackscan
