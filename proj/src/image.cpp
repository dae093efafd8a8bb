#include "fvss/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fvss/errors.hpp"

namespace fvss {

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  for (;;) {
    int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

void read_header(std::istream& in, const char* magic, const std::filesystem::path& path,
                 int& w, int& h) {
  if (next_token(in) != magic)
    throw UserError("not a " + std::string(magic) + " file: " + path.string());
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    const int maxval = std::stoi(next_token(in));
    if (maxval != 255) throw UserError("unsupported maxval in " + path.string());
  } catch (const std::invalid_argument&) {
    throw UserError("malformed header in " + path.string());
  }
  if (w <= 0 || h <= 0) throw UserError("bad dimensions in " + path.string());
}

}  // namespace

ImageU8 read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path.string());
  int w = 0, h = 0;
  read_header(in, "P6", path, w, h);
  ImageU8 img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw UserError("truncated pixel data in " + path.string());
  return img;
}

void write_ppm(const ImageU8& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw UserError("write failed: " + path.string());
}

MaskU8 read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path.string());
  int w = 0, h = 0;
  read_header(in, "P5", path, w, h);
  MaskU8 img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw UserError("truncated pixel data in " + path.string());
  return img;
}

void write_pgm(const MaskU8& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw UserError("write failed: " + path.string());
}

ImageU8 crop(const ImageU8& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > img.width || y0 + h > img.height)
    throw std::invalid_argument("crop window outside image");
  ImageU8 out(w, h);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* src = &img.data[(static_cast<std::size_t>(y0 + y) * img.width + x0) * 3];
    std::copy(src, src + static_cast<std::size_t>(w) * 3,
              &out.data[static_cast<std::size_t>(y) * w * 3]);
  }
  return out;
}

ImageU8 center_crop(const ImageU8& img, int side) {
  const int s = std::min({side, img.width, img.height});
  return crop(img, (img.width - s) / 2, (img.height - s) / 2, s, s);
}

ImageU8 resize_bilinear(const ImageU8& img, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("bad resize target");
  if (out_w == img.width && out_h == img.height) return img;
  ImageU8 out(out_w, out_h);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * img.at(x0, y0, c) + wx * img.at(x1, y0, c);
        const double bot = (1.0 - wx) * img.at(x0, y1, c) + wx * img.at(x1, y1, c);
        const double v = (1.0 - wy) * top + wy * bot;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

ImageU8 mirror_horizontal(const ImageU8& img) {
  ImageU8 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
  return out;
}

MapF64 luma(const ImageU8& img) {
  MapF64 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) =
          0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
  return out;
}

}  // namespace fvss
