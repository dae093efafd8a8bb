#include "fvss/gaze_geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace fvss::geom {

namespace {

int clamp_axis(int g, int n, int resolution) {
  const int lo = n / 2;                 // floor(n/2)
  const int hi = resolution - (n - n / 2);  // resolution - ceil(n/2)
  return std::clamp(g, lo, hi);
}

}  // namespace

CorrectedGaze correct_gaze(GazePoint g, CropSpec spec) {
  if (!spec.valid())
    throw std::invalid_argument("invalid crop spec: n must be in (0, resolution]");
  if (g.x < 0 || g.x >= spec.resolution || g.y < 0 || g.y >= spec.resolution)
    throw std::invalid_argument("gaze outside frame");
  return {clamp_axis(g.x, spec.n, spec.resolution), clamp_axis(g.y, spec.n, spec.resolution)};
}

bool corrected_in_bounds(CorrectedGaze cg, CropSpec spec) {
  const int lo = spec.n / 2;
  const int hi = spec.resolution - (spec.n - spec.n / 2);
  return cg.x >= lo && cg.x <= hi && cg.y >= lo && cg.y <= hi;
}

ImageU8 crop_window(const ImageU8& frame, CorrectedGaze cg, CropSpec spec) {
  if (!spec.valid()) throw std::invalid_argument("invalid crop spec");
  if (frame.width != spec.resolution || frame.height != spec.resolution)
    throw std::invalid_argument("frame does not match crop spec resolution");
  if (!corrected_in_bounds(cg, spec))
    throw std::invalid_argument("gaze violates clamp bounds; run correct_gaze first");
  return crop(frame, window_origin(cg.x, spec.n), window_origin(cg.y, spec.n), spec.n, spec.n);
}

GazeHistogram gaze_histogram(std::span<const GazePoint> gazes, int bin_size, int resolution) {
  if (bin_size <= 0 || resolution <= 0) throw std::invalid_argument("bad histogram bin size");
  GazeHistogram hist;
  hist.bin_size = bin_size;
  hist.bins_per_side = (resolution + bin_size - 1) / bin_size;
  hist.counts.assign(static_cast<std::size_t>(hist.bins_per_side) * hist.bins_per_side, 0);
  hist.center_x = resolution / 2.0;
  hist.center_y = resolution / 2.0;

  double sum_x = 0.0, sum_y = 0.0;
  for (const GazePoint& g : gazes) {
    if (g.x < 0 || g.x >= resolution || g.y < 0 || g.y >= resolution)
      throw std::invalid_argument("gaze outside frame in histogram input");
    hist.counts[static_cast<std::size_t>(g.y / bin_size) * hist.bins_per_side + g.x / bin_size]++;
    sum_x += g.x;
    sum_y += g.y;
    hist.total++;
  }
  if (hist.total > 0) {
    hist.has_mean = true;
    hist.mean_x = sum_x / static_cast<double>(hist.total);
    hist.mean_y = sum_y / static_cast<double>(hist.total);
  }
  return hist;
}

void write_histogram_csv(const GazeHistogram& hist, std::ostream& out) {
  out << "bin_x,bin_y,count\n";
  for (int by = 0; by < hist.bins_per_side; ++by)
    for (int bx = 0; bx < hist.bins_per_side; ++bx)
      if (hist.count_at(bx, by) > 0)
        out << bx << "," << by << "," << hist.count_at(bx, by) << "\n";
}

}  // namespace fvss::geom
