#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"
#include "trackscan/platform.hpp"
#include "trackscan/stats.hpp"

namespace trackscan {

inline constexpr double default_threshold_px = 3.0;
inline constexpr int default_run_length = 3;

struct TrackDetection {
  int left_edge = -1;
  int right_edge = -1;
  int center = -1;
  int width_px = 0;
  double height_px = 0.0;  // elevation above the platform, positive up
  bool found = false;
};

/// Elevation above the platform per column (positive up). Invalid columns are NaN.
inline std::vector<double> elevations(const LaserProfile& profile, const PlatformBaseline& baseline) {
  std::vector<double> out(static_cast<std::size_t>(profile.columns()), std::numeric_limits<double>::quiet_NaN());
  for (int c = 0; c < profile.columns(); ++c) {
    if (profile.is_valid(c)) {
      out[static_cast<std::size_t>(c)] = baseline.at(static_cast<double>(c)) - profile.row(c);
    }
  }
  return out;
}

namespace detail {

// NaN compares false, so invalid columns break runs.
inline bool above(double elevation, double threshold) noexcept { return elevation > threshold; }

}  // namespace detail

/// Track edges by the run-length rule: an edge starts a run of at least
/// `run_length` consecutive valid columns whose elevation exceeds the
/// threshold. The left edge is found scanning left to right and the right
/// edge scanning right to left.
inline TrackDetection detect_track(const std::vector<double>& elevation, double threshold_px = default_threshold_px,
                                   int run_length = default_run_length) {
  if (!(threshold_px > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  }
  if (run_length < 1) {
    throw Error(ErrorCode::InvalidArgument, "run length must be at least 1");
  }
  const int n = static_cast<int>(elevation.size());
  TrackDetection det;

  int run = 0;
  for (int c = 0; c < n; ++c) {
    run = detail::above(elevation[static_cast<std::size_t>(c)], threshold_px) ? run + 1 : 0;
    if (run == run_length) {
      det.left_edge = c - run_length + 1;
      break;
    }
  }
  run = 0;
  for (int c = n - 1; c >= 0; --c) {
    run = detail::above(elevation[static_cast<std::size_t>(c)], threshold_px) ? run + 1 : 0;
    if (run == run_length) {
      det.right_edge = c + run_length - 1;
      break;
    }
  }
  if (det.left_edge < 0 || det.right_edge < 0 || det.left_edge >= det.right_edge) {
    return TrackDetection{};
  }

  det.center = static_cast<int>(std::lround(0.5 * static_cast<double>(det.left_edge + det.right_edge)));
  det.width_px = det.right_edge - det.left_edge;

  std::vector<double> around_center;
  for (int c = det.center - 1; c <= det.center + 1; ++c) {
    if (c >= 0 && c < n && !std::isnan(elevation[static_cast<std::size_t>(c)])) {
      around_center.push_back(elevation[static_cast<std::size_t>(c)]);
    }
  }
  if (around_center.empty()) {
    return TrackDetection{};
  }
  det.height_px = median(around_center);
  // Two separate beads with platform between them can put the centre on the platform.
  if (!(det.height_px > threshold_px)) {
    return TrackDetection{};
  }
  det.found = true;
  return det;
}

inline TrackDetection detect_track(const LaserProfile& profile, const PlatformBaseline& baseline,
                                   double threshold_px = default_threshold_px, int run_length = default_run_length) {
  return detect_track(elevations(profile, baseline), threshold_px, run_length);
}

}  // namespace trackscan
