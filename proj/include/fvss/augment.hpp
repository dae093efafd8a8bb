#pragma once

#include <cstdint>

#include "fvss/frames.hpp"
#include "fvss/image.hpp"
#include "fvss/rng.hpp"

namespace fvss::aug {

// Maximum time separation between an anchor frame and its positive pair.
struct TemporalWindow {
  double delta_t_seconds = 15.0;
  int fps = ingest::kFramesPerSecond;

  // round-half-up conversion of the window to frames
  int max_offset_frames() const;
};

// Uniform draw from {max(lo, t - k), ..., min(hi, t + k)} \ {t}; the anchor
// itself when that set is empty. Bounds are inclusive frame indices.
std::int64_t sample_neighbor_index(std::int64_t anchor, std::int64_t lo, std::int64_t hi,
                                   int max_offset, Rng& rng);

// View-level augmentation parameters (one view). The defaults follow the
// common MoCoV3 recipe with the blur probability left to the per-view
// factories below.
struct AugmentPolicy {
  double crop_scale_min = 0.2;
  double crop_scale_max = 1.0;
  double crop_aspect_min = 3.0 / 4.0;
  double crop_aspect_max = 4.0 / 3.0;
  int output_side = 32;
  double flip_probability = 0.5;
  double jitter_probability = 0.8;
  double jitter_brightness = 0.4;
  double jitter_contrast = 0.4;
  double jitter_saturation = 0.2;
  double jitter_hue = 0.1;
  double grayscale_probability = 0.2;
  double blur_probability = 0.5;
  double blur_sigma_min = 0.1;
  double blur_sigma_max = 2.0;
  int crop_retries = 10;

  // Resize-only policy; with a fixed 1.0 crop scale the output equals a
  // bilinear resize of the input.
  static AugmentPolicy identity(int output_side);
};

// The two views draw independent parameters; only the blur probability
// differs between them.
struct PairAugmentPolicy {
  AugmentPolicy query;
  AugmentPolicy key;

  static PairAugmentPolicy mocov3(int output_side);
};

// Random resized crop -> bilinear resize to the output side -> color jitter
// -> grayscale -> blur -> horizontal flip, all deterministic given (input,
// policy, rng state).
ImageU8 augment(const ImageU8& view, const AugmentPolicy& policy, Rng& rng);

// Anchor/neighbor records (already gaze-cropped at ingest) to the two
// augmented training views.
struct TrainingViews {
  ImageU8 view_q;
  ImageU8 view_k;
};

TrainingViews make_training_pair(const ingest::FrameRecord& anchor,
                                 const ingest::FrameRecord& neighbor,
                                 const PairAugmentPolicy& policy, Rng& rng);

}  // namespace fvss::aug
