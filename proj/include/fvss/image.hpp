#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fvss {

// Packed RGB8, row-major, origin top-left, x = column.
struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  ImageU8() = default;
  ImageU8(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  bool same_shape(const ImageU8& o) const { return width == o.width && height == o.height; }
};

// Single-channel 8-bit image (object masks, grayscale).
struct MaskU8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  MaskU8() = default;
  MaskU8(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Single-channel double map (saliency, intermediate math).
struct MapF64 {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  MapF64() = default;
  MapF64(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Binary PPM (P6) / PGM (P5), maxval 255. The one decode path of the toolkit;
// synthetic videos and eval sets are written in the same format.
ImageU8 read_ppm(const std::filesystem::path& path);
void write_ppm(const ImageU8& img, const std::filesystem::path& path);
MaskU8 read_pgm(const std::filesystem::path& path);
void write_pgm(const MaskU8& img, const std::filesystem::path& path);

// Axis-aligned subimage [x0, x0+w) x [y0, y0+h); must lie inside the source.
ImageU8 crop(const ImageU8& img, int x0, int y0, int w, int h);

// Centered square crop of the given side.
ImageU8 center_crop(const ImageU8& img, int side);

// Separable bilinear resampling with half-pixel centers.
ImageU8 resize_bilinear(const ImageU8& img, int out_w, int out_h);

ImageU8 mirror_horizontal(const ImageU8& img);

// ITU-R 601 luma.
MapF64 luma(const ImageU8& img);

}  // namespace fvss
