#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"

namespace trackscan {

/// Vertex offset of the parabola through (-1, below), (0, peak), (+1, above).
/// Empty when the triple is not strictly concave, flat triples included.
inline std::optional<double> parabola_vertex_offset(double below, double peak, double above) noexcept {
  const double curvature = below - 2.0 * peak + above;
  if (!(curvature < 0.0)) {
    return std::nullopt;
  }
  return (below - above) / (2.0 * curvature);
}

/// Subpixel laser-line row per column: argmax row (ties to the smallest
/// row), then the vertex of the parabola through the argmax and its two
/// vertical neighbours.
///
/// A column is invalid when its peak does not exceed `intensity_floor`, when
/// the argmax sits on the first or last row, or when the triple is not
/// concave.
inline LaserProfile extract_laser_line(const Frame& frame, double intensity_floor) {
  validate(frame);
  if (!(intensity_floor >= 0.0 && intensity_floor < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "intensity floor must lie in [0, 1)");
  }

  const int width = frame.width;
  const int height = frame.height;

  // Row-major sweep keeps the memory access sequential. Strict comparison keeps
  // the first (smallest) row on ties.
  std::vector<double> best(static_cast<std::size_t>(width), -1.0);
  std::vector<int> best_row(static_cast<std::size_t>(width), 0);
  for (int r = 0; r < height; ++r) {
    const double* row = frame.intensities.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(width);
    for (int c = 0; c < width; ++c) {
      if (row[c] > best[static_cast<std::size_t>(c)]) {
        best[static_cast<std::size_t>(c)] = row[c];
        best_row[static_cast<std::size_t>(c)] = r;
      }
    }
  }

  LaserProfile profile(width, height);
  for (int c = 0; c < width; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    const int r0 = best_row[idx];
    if (!(best[idx] > intensity_floor) || r0 == 0 || r0 == height - 1) {
      continue;
    }
    const auto offset = parabola_vertex_offset(frame.at(r0 - 1, c), frame.at(r0, c), frame.at(r0 + 1, c));
    if (!offset) {
      continue;
    }
    profile.row_subpixel[idx] = static_cast<double>(r0) + *offset;
    profile.valid[idx] = 1;
  }
  return profile;
}

}  // namespace trackscan
