#include "fvss/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fvss::aug {

int TemporalWindow::max_offset_frames() const {
  if (delta_t_seconds < 0.0) throw std::invalid_argument("temporal window must be nonnegative");
  return static_cast<int>(std::floor(delta_t_seconds * fps + 0.5));
}

std::int64_t sample_neighbor_index(std::int64_t anchor, std::int64_t lo, std::int64_t hi,
                                   int max_offset, Rng& rng) {
  if (anchor < lo || anchor > hi) throw std::invalid_argument("anchor outside video bounds");
  const std::int64_t wlo = std::max(lo, anchor - max_offset);
  const std::int64_t whi = std::min(hi, anchor + max_offset);
  const std::int64_t count = whi - wlo;  // window size minus the anchor
  if (count <= 0) return anchor;
  std::int64_t pick = wlo + static_cast<std::int64_t>(rng.next_below(count));
  if (pick >= anchor) pick++;  // skip the anchor itself
  return pick;
}

AugmentPolicy AugmentPolicy::identity(int output_side) {
  AugmentPolicy p;
  p.crop_scale_min = p.crop_scale_max = 1.0;
  p.crop_aspect_min = p.crop_aspect_max = 1.0;
  p.output_side = output_side;
  p.flip_probability = 0.0;
  p.jitter_probability = 0.0;
  p.grayscale_probability = 0.0;
  p.blur_probability = 0.0;
  return p;
}

PairAugmentPolicy PairAugmentPolicy::mocov3(int output_side) {
  PairAugmentPolicy p;
  p.query.output_side = output_side;
  p.key.output_side = output_side;
  p.query.blur_probability = 0.5;
  p.key.blur_probability = 0.1;
  return p;
}

namespace {

struct Rect {
  int x0, y0, w, h;
};

Rect pick_crop_rect(int side, const AugmentPolicy& policy, Rng& rng) {
  const double area = static_cast<double>(side) * side;
  for (int attempt = 0; attempt < policy.crop_retries; ++attempt) {
    const double target = area * rng.uniform(policy.crop_scale_min, policy.crop_scale_max);
    const double aspect = std::exp(
        rng.uniform(std::log(policy.crop_aspect_min), std::log(policy.crop_aspect_max)));
    const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
    if (w < 1 || h < 1 || w > side || h > side) continue;
    const int x0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(side - w) + 1));
    const int y0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(side - h) + 1));
    return {x0, y0, w, h};
  }
  // Center fallback at the mean requested scale.
  const double mid = 0.5 * (policy.crop_scale_min + policy.crop_scale_max);
  const int s = std::clamp(static_cast<int>(std::lround(side * std::sqrt(mid))), 1, side);
  return {(side - s) / 2, (side - s) / 2, s, s};
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  v = mx;
  const double d = mx - mn;
  s = mx <= 0.0 ? 0.0 : d / mx;
  if (d <= 0.0) {
    h = 0.0;
    return;
  }
  if (mx == r)
    h = (g - b) / d + (g < b ? 6.0 : 0.0);
  else if (mx == g)
    h = (b - r) / d + 2.0;
  else
    h = (r - g) / d + 4.0;
  h /= 6.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  h = h - std::floor(h);
  const double k = h * 6.0;
  const int sector = static_cast<int>(k) % 6;
  const double f = k - std::floor(k);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

// Brightness -> contrast -> saturation -> hue, in double, clamped back to u8.
ImageU8 color_jitter(const ImageU8& img, const AugmentPolicy& policy, Rng& rng) {
  const double fb = rng.uniform(std::max(0.0, 1.0 - policy.jitter_brightness),
                                1.0 + policy.jitter_brightness);
  const double fc = rng.uniform(std::max(0.0, 1.0 - policy.jitter_contrast),
                                1.0 + policy.jitter_contrast);
  const double fs = rng.uniform(std::max(0.0, 1.0 - policy.jitter_saturation),
                                1.0 + policy.jitter_saturation);
  const double fh = rng.uniform(-policy.jitter_hue, policy.jitter_hue);

  const std::size_t pixels = static_cast<std::size_t>(img.width) * img.height;
  std::vector<double> rgb(pixels * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = img.data[i];

  for (double& v : rgb) v *= fb;

  double gray_mean = 0.0;
  for (std::size_t i = 0; i < pixels; ++i)
    gray_mean += 0.299 * rgb[i * 3] + 0.587 * rgb[i * 3 + 1] + 0.114 * rgb[i * 3 + 2];
  gray_mean /= static_cast<double>(pixels);
  for (double& v : rgb) v = gray_mean + fc * (v - gray_mean);

  for (std::size_t i = 0; i < pixels; ++i) {
    const double l =
        0.299 * rgb[i * 3] + 0.587 * rgb[i * 3 + 1] + 0.114 * rgb[i * 3 + 2];
    for (int c = 0; c < 3; ++c) rgb[i * 3 + c] = l + fs * (rgb[i * 3 + c] - l);
  }

  for (std::size_t i = 0; i < pixels; ++i) {
    double r = std::clamp(rgb[i * 3] / 255.0, 0.0, 1.0);
    double g = std::clamp(rgb[i * 3 + 1] / 255.0, 0.0, 1.0);
    double b = std::clamp(rgb[i * 3 + 2] / 255.0, 0.0, 1.0);
    double h, s, v;
    rgb_to_hsv(r, g, b, h, s, v);
    hsv_to_rgb(h + fh, s, v, r, g, b);
    rgb[i * 3] = r * 255.0;
    rgb[i * 3 + 1] = g * 255.0;
    rgb[i * 3 + 2] = b * 255.0;
  }

  ImageU8 out(img.width, img.height);
  for (std::size_t i = 0; i < rgb.size(); ++i)
    out.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(rgb[i], 0.0, 255.0)));
  return out;
}

ImageU8 to_grayscale(const ImageU8& img) {
  ImageU8 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double l =
          0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      const auto v = static_cast<std::uint8_t>(std::lround(std::clamp(l, 0.0, 255.0)));
      out.at(x, y, 0) = v;
      out.at(x, y, 1) = v;
      out.at(x, y, 2) = v;
    }
  return out;
}

ImageU8 gaussian_blur(const ImageU8& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int w = img.width, h = img.height;
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int xx = std::clamp(x + i, 0, w - 1);
          acc += kernel[i + radius] * img.at(xx, y, c);
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
      }
  ImageU8 out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int yy = std::clamp(y + i, 0, h - 1);
          acc += kernel[i + radius] * tmp[(static_cast<std::size_t>(yy) * w + x) * 3 + c];
        }
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0)));
      }
  return out;
}

}  // namespace

ImageU8 augment(const ImageU8& view, const AugmentPolicy& policy, Rng& rng) {
  if (view.width != view.height) throw std::invalid_argument("augment expects square views");
  if (policy.output_side < 1 || policy.output_side > view.width)
    throw std::invalid_argument("output side must be in [1, input side]");

  const Rect r = pick_crop_rect(view.width, policy, rng);
  ImageU8 out = crop(view, r.x0, r.y0, r.w, r.h);
  out = resize_bilinear(out, policy.output_side, policy.output_side);

  if (policy.jitter_probability > 0.0 && rng.bernoulli(policy.jitter_probability))
    out = color_jitter(out, policy, rng);
  if (policy.grayscale_probability > 0.0 && rng.bernoulli(policy.grayscale_probability))
    out = to_grayscale(out);
  if (policy.blur_probability > 0.0 && rng.bernoulli(policy.blur_probability))
    out = gaussian_blur(out, rng.uniform(policy.blur_sigma_min, policy.blur_sigma_max));
  if (policy.flip_probability > 0.0 && rng.bernoulli(policy.flip_probability))
    out = mirror_horizontal(out);
  return out;
}

TrainingViews make_training_pair(const ingest::FrameRecord& anchor,
                                 const ingest::FrameRecord& neighbor,
                                 const PairAugmentPolicy& policy, Rng& rng) {
  TrainingViews views;
  views.view_q = augment(anchor.pixels, policy.query, rng);
  views.view_k = augment(neighbor.pixels, policy.key, rng);
  return views;
}

}  // namespace fvss::aug
