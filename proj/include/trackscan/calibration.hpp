#pragma once

#include <cmath>
#include <span>

#include "trackscan/error.hpp"
#include "trackscan/stats.hpp"

namespace trackscan {

inline constexpr double default_gauge_mm = 5.0;

/// Linear pixel-elevation to millimetre map anchored on a gauge scan.
///
/// The map is stored as (gauge thickness, gauge pixel span) rather than a bare
/// gain so that both anchor scans map back exactly: 0 px -> offset and
/// span px -> gauge thickness + offset, with no rounding in between.
struct CalibrationMap {
  double gauge_mm = default_gauge_mm;
  double span_px = 500.0;
  double offset_mm = 0.0;

  double gain_mm_per_px() const noexcept { return gauge_mm / span_px; }

  static CalibrationMap from_gain(double gain_mm_per_px, double gauge_mm = default_gauge_mm,
                                  double offset_mm = 0.0) {
    if (!(gain_mm_per_px > 0.0) || !std::isfinite(gain_mm_per_px)) {
      throw Error(ErrorCode::InvalidArgument, "calibration gain must be positive");
    }
    if (!(gauge_mm > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "gauge thickness must be positive");
    }
    return {gauge_mm, gauge_mm / gain_mm_per_px, offset_mm};
  }

  /// Nominal map implied by the pixel pitch (pitch_um micrometres per pixel).
  static CalibrationMap from_pixel_pitch(double pitch_um) { return from_gain(pitch_um / 1000.0); }
};

inline double apply_calibration(const CalibrationMap& map, double elevation_px) noexcept {
  return map.gauge_mm * (elevation_px / map.span_px) + map.offset_mm;
}

/// Two-anchor calibration from a platform scan and a gauge-top scan (both in
/// image rows). Heights are measured relative to the platform median, so the
/// offset is zero.
inline CalibrationMap calibrate_from_gauge(std::span<const double> platform_rows, std::span<const double> gauge_rows,
                                           double gauge_thickness_mm = default_gauge_mm) {
  if (platform_rows.empty() || gauge_rows.empty()) {
    throw Error(ErrorCode::InvalidArgument, "calibration needs platform and gauge samples");
  }
  if (!(gauge_thickness_mm > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gauge thickness must be positive");
  }
  const double span = std::abs(median(platform_rows) - median(gauge_rows));
  if (!(span > 0.0)) {
    throw Error(ErrorCode::ZeroSpan, "platform and gauge medians coincide");
  }
  return {gauge_thickness_mm, span, 0.0};
}

}  // namespace trackscan
