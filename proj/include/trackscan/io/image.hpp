#pragma once

#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>

#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"
#include "trackscan/io/pgm.hpp"
#include "trackscan/io/png.hpp"

namespace trackscan::io {

/// Loads a PGM or PNG frame, dispatching on the file signature.
inline Frame load_frame(const std::filesystem::path& path, double pixel_pitch_um = 10.0) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::array<unsigned char, 8> magic{};
  probe.read(reinterpret_cast<char*>(magic.data()), magic.size());
  const auto got = static_cast<std::size_t>(probe.gcount());
  probe.close();

  Frame frame;
  if (got >= 2 && magic[0] == 'P' && magic[1] == '5') {
    frame = read_pgm(path, pixel_pitch_um);
  } else if (got == 8 && png_sig_cmp(magic.data(), 0, 8) == 0) {
    frame = read_png(path, pixel_pitch_um);
  } else {
    throw Error(ErrorCode::Format, "unrecognised image format: " + path.string());
  }
  validate(frame);
  return frame;
}

inline bool is_image_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".pgm" || ext == ".png";
}

}  // namespace trackscan::io
