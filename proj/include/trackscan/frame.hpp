#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trackscan/error.hpp"

namespace trackscan {

/// Grayscale triangulation image. Intensities are row-major and normalized to
/// [0, 1]; rows grow downward, so a smaller row index means a higher surface.
struct Frame {
  static constexpr bool image_z_axis_points_down = true;
  static constexpr int min_dimension = 16;

  int width = 0;
  int height = 0;
  std::vector<double> intensities;
  std::string frame_id;
  double pixel_pitch_um = 10.0;

  Frame() = default;
  Frame(int w, int h, double pitch_um = 10.0, std::string id = {})
      : width(w), height(h), intensities(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0),
        frame_id(std::move(id)), pixel_pitch_um(pitch_um) {}

  double at(int row, int column) const {
    return intensities[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(column)];
  }
  double& at(int row, int column) {
    return intensities[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(column)];
  }
};

/// Throws InvalidArgument when the frame breaks its invariants.
inline void validate(const Frame& frame) {
  if (frame.width < Frame::min_dimension || frame.height < Frame::min_dimension) {
    throw Error(ErrorCode::InvalidArgument, "frame must be at least 16x16 pixels, got " +
                                                std::to_string(frame.width) + "x" + std::to_string(frame.height));
  }
  if (frame.intensities.size() != static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height)) {
    throw Error(ErrorCode::InvalidArgument, "intensity buffer does not match frame dimensions");
  }
  if (!(frame.pixel_pitch_um > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "pixel pitch must be positive");
  }
  for (double v : frame.intensities) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "intensity outside [0, 1]");
    }
  }
}

/// Per-column subpixel laser-line position with a validity mask.
struct LaserProfile {
  std::vector<double> row_subpixel;
  std::vector<std::uint8_t> valid;
  int frame_height = 0;

  LaserProfile() = default;
  LaserProfile(int columns, int height)
      : row_subpixel(static_cast<std::size_t>(columns), 0.0),
        valid(static_cast<std::size_t>(columns), 0),
        frame_height(height) {}

  int columns() const noexcept { return static_cast<int>(row_subpixel.size()); }
  bool is_valid(int column) const { return valid[static_cast<std::size_t>(column)] != 0; }
  double row(int column) const { return row_subpixel[static_cast<std::size_t>(column)]; }
};

}  // namespace trackscan
