#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"

namespace trackscan::io {

/// Grayscale PNG (8- or 16-bit, with or without alpha; alpha is ignored).
/// Colour images are rejected. Sub-byte depths are expanded to 8 bits.
inline Frame read_png(const std::filesystem::path& path, double pixel_pitch_um = 10.0) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "rb"), &std::fclose);
  if (!file) throw Error(ErrorCode::Io, "cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::Io, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw Error(ErrorCode::Io, "libpng initialisation failed");

  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;

  // libpng reports errors by longjmp; nothing with a non-trivial destructor is
  // created between here and the end of the read.
  if (setjmp(png_jmpbuf(png))) {
    throw Error(ErrorCode::Format, "malformed PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
    throw Error(ErrorCode::Format, "only grayscale PNG is supported: " + path.string());
  }
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // little-endian samples on read
  png_read_update_info(png, info);

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + r * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  Frame frame(static_cast<int>(width), static_cast<int>(height), pixel_pitch_um, path.stem().string());
  const bool wide = bit_depth == 16;
  const double denom = wide ? 65535.0 : 255.0;
  for (png_uint_32 r = 0; r < height; ++r) {
    const unsigned char* src = rows[r];
    for (png_uint_32 c = 0; c < width; ++c) {
      const unsigned v = wide ? static_cast<unsigned>(src[2 * c]) | (static_cast<unsigned>(src[2 * c + 1]) << 8)
                              : src[c];
      frame.at(static_cast<int>(r), static_cast<int>(c)) = static_cast<double>(v) / denom;
    }
  }
  return frame;
}

/// 16-bit grayscale PNG writer, used for fixtures and conversions.
inline void write_png(const std::filesystem::path& path, const Frame& frame) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!file) throw Error(ErrorCode::Io, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::Io, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (!info) throw Error(ErrorCode::Io, "libpng initialisation failed");

  std::vector<unsigned char> pixels(static_cast<std::size_t>(frame.width) * frame.height * 2);
  for (std::size_t i = 0; i < frame.intensities.size(); ++i) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(frame.intensities[i], 0.0, 1.0) * 65535.0));
    pixels[2 * i] = static_cast<unsigned char>(q >> 8);
    pixels[2 * i + 1] = static_cast<unsigned char>(q & 0xffu);
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(frame.height));
  for (int r = 0; r < frame.height; ++r) rows[static_cast<std::size_t>(r)] = pixels.data() + static_cast<std::size_t>(r) * frame.width * 2;

  if (setjmp(png_jmpbuf(png))) {
    throw Error(ErrorCode::Io, "PNG encoding failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(frame.width), static_cast<png_uint_32>(frame.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
}

}  // namespace trackscan::io
