#pragma once

#include <optional>
#include <vector>

#include "trackscan/calibration.hpp"
#include "trackscan/ellipse.hpp"
#include "trackscan/frame.hpp"
#include "trackscan/laser_line.hpp"
#include "trackscan/platform.hpp"
#include "trackscan/track.hpp"

namespace trackscan {

inline constexpr double default_intensity_floor = 0.2;

struct MeasureOptions {
  double intensity_floor = default_intensity_floor;
  double threshold_px = default_threshold_px;
  int run_length = default_run_length;
  bool fit_ellipse = true;  // off for flat-topped features such as gauge steps
  EllipseFitOptions ellipse;
};

struct TrackMeasurement {
  LaserProfile profile;
  PlatformBaseline baseline;
  std::vector<double> elevation_px;
  TrackDetection detection;
  std::vector<Point2> fit_points;  // x: column, z: calibrated elevation in pitch-equivalent pixels
  std::optional<EllipseFit> ellipse;

  bool found = false;
  double width_um = 0.0;
  double height_um = 0.0;
  double diffusion_um = 0.0;  // mean absolute orthogonal residual to the fitted ellipse
};

/// Full detection chain on one frame: laser line, platform, track edges,
/// ellipse fit on the track region. Elevations go through `calibration`
/// before fitting so residuals come out in physical units.
inline TrackMeasurement measure_track(const Frame& frame, const CalibrationMap& calibration,
                                      const MeasureOptions& options = {}) {
  TrackMeasurement m;
  m.profile = extract_laser_line(frame, options.intensity_floor);
  m.baseline = detect_platform(m.profile);
  m.elevation_px = elevations(m.profile, m.baseline);
  m.detection = detect_track(m.elevation_px, options.threshold_px, options.run_length);
  if (!m.detection.found) {
    return m;
  }

  const double pitch_um = frame.pixel_pitch_um;
  const auto to_um = [&](double elevation_px) { return 1000.0 * apply_calibration(calibration, elevation_px); };
  m.found = true;
  m.width_um = static_cast<double>(m.detection.width_px) * pitch_um;
  m.height_um = to_um(m.detection.height_px);
  if (!options.fit_ellipse) {
    return m;
  }

  for (int c = m.detection.left_edge; c <= m.detection.right_edge; ++c) {
    if (!m.profile.is_valid(c)) continue;
    m.fit_points.push_back({static_cast<double>(c), to_um(m.elevation_px[static_cast<std::size_t>(c)]) / pitch_um});
  }
  m.ellipse = fit_ellipse(m.fit_points, options.ellipse);
  m.diffusion_um = m.ellipse->mean_abs_residual * pitch_um;
  return m;
}

}  // namespace trackscan
