#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "fvss/image.hpp"

namespace fvss::geom {

// Pixel-space gaze location, integer coordinates, origin top-left, x = column.
struct GazePoint {
  int x = 0;
  int y = 0;
};

// Side length of the central-vision crop and the frame resolution it applies to.
struct CropSpec {
  int n = 224;
  int resolution = 540;

  bool valid() const { return n > 0 && n <= resolution; }
};

// Gaze after boundary correction; the implied n-by-n window fits the frame.
struct CorrectedGaze {
  int x = 0;
  int y = 0;
};

// Clamps the gaze so the crop window stays inside the frame. Per axis the
// result is clamp(g, floor(n/2), R - ceil(n/2)); identical to the minimal
// shift that keeps the window boundaries in the image, and the identity on
// interior points. Throws std::invalid_argument on an invalid spec or an
// out-of-frame gaze.
CorrectedGaze correct_gaze(GazePoint g, CropSpec spec);

// True when cg satisfies the clamp bounds for spec.
bool corrected_in_bounds(CorrectedGaze cg, CropSpec spec);

// Top-left corner of the window implied by a corrected gaze.
inline int window_origin(int corrected, int n) { return corrected - n / 2; }

// Extracts the n-by-n window centered at cg. Rejects a gaze that violates the
// clamp bounds (the caller skipped correct_gaze) or a frame that does not
// match spec.resolution.
ImageU8 crop_window(const ImageU8& frame, CorrectedGaze cg, CropSpec spec);

// 2-D counts of gaze locations over the frame, plus the mean location and the
// frame center for offset comparison.
struct GazeHistogram {
  int bin_size = 0;
  int bins_per_side = 0;
  std::vector<std::uint64_t> counts;  // bins_per_side^2, row-major (y major)
  std::uint64_t total = 0;
  bool has_mean = false;  // false for an empty input stream
  double mean_x = 0.0;
  double mean_y = 0.0;
  double center_x = 0.0;
  double center_y = 0.0;

  std::uint64_t count_at(int bx, int by) const {
    return counts[static_cast<std::size_t>(by) * bins_per_side + bx];
  }
};

// bin_size need not divide resolution; the final bin is truncated.
GazeHistogram gaze_histogram(std::span<const GazePoint> gazes, int bin_size, int resolution);

// CSV export: header `bin_x,bin_y,count`, one row per nonzero bin.
void write_histogram_csv(const GazeHistogram& hist, std::ostream& out);

}  // namespace fvss::geom
