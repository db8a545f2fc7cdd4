#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"

namespace trackscan::io {

namespace detail {

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

inline int pnm_int(std::istream& in, const char* what) {
  const auto token = pnm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Format, std::string("bad PGM ") + what + " '" + token + "'");
  }
}

}  // namespace detail

/// Binary PGM (P5), 8- or 16-bit; intensities normalized by maxval.
inline Frame read_pgm(std::istream& in, double pixel_pitch_um = 10.0, std::string frame_id = {}) {
  if (detail::pnm_token(in) != "P5") {
    throw Error(ErrorCode::Format, "not a binary PGM (P5) stream");
  }
  const int width = detail::pnm_int(in, "width");
  const int height = detail::pnm_int(in, "height");
  const int maxval = detail::pnm_int(in, "maxval");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::Format, "PGM dimensions must be positive");
  if (maxval <= 0 || maxval > 65535) throw Error(ErrorCode::Format, "PGM maxval out of range");

  Frame frame(width, height, pixel_pitch_um, std::move(frame_id));
  const std::size_t count = frame.intensities.size();
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(count * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error(ErrorCode::Format, "truncated PGM pixel data");
  }
  const double denom = static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bytes_per_sample == 2 ? (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
    frame.intensities[i] = std::min(1.0, static_cast<double>(v) / denom);
  }
  return frame;
}

inline Frame read_pgm(const std::filesystem::path& path, double pixel_pitch_um = 10.0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_pgm(in, pixel_pitch_um, path.stem().string());
}

/// Writes P5 with maxval 255 (bits = 8) or 65535 (bits = 16), rounding to nearest.
inline void write_pgm(std::ostream& out, const Frame& frame, int bits = 16) {
  if (bits != 8 && bits != 16) throw Error(ErrorCode::InvalidArgument, "PGM bit depth must be 8 or 16");
  const unsigned maxval = bits == 8 ? 255u : 65535u;
  out << "P5\n" << frame.width << ' ' << frame.height << '\n' << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(frame.intensities.size() * (bits / 8));
  for (double v : frame.intensities) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (bits == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xffu));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

inline void write_pgm(const std::filesystem::path& path, const Frame& frame, int bits = 16) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_pgm(out, frame, bits);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace trackscan::io
