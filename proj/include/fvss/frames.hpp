#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fvss/gaze_geometry.hpp"
#include "fvss/image.hpp"

namespace fvss::ingest {

enum class GazeOrigin : std::uint8_t { GroundTruth = 0, Predicted = 1 };

// One frame with provenance. Before ingest cropping, pixels hold the full
// R-by-R frame; in shards they hold the n-by-n central-vision crop and gaze
// holds the corrected crop center.
struct FrameRecord {
  std::uint64_t video_id = 0;
  std::uint32_t frame_index = 0;  // position in the video at the extraction rate
  std::uint32_t timestamp_ms = 0;
  geom::GazePoint gaze;
  bool has_gaze = false;  // ground-truth gaze attached at load time
  GazeOrigin gaze_origin = GazeOrigin::GroundTruth;
  ImageU8 pixels;
};

inline constexpr int kClipFrames = 25;
inline constexpr int kSequenceFrames = 8;
inline constexpr int kFramesPerSecond = 5;
inline constexpr std::uint32_t kFrameIntervalMs = 200;

// 25 consecutive frames from one video.
struct Clip {
  std::vector<FrameRecord> frames;
};

// Order-preserving 8-frame view into an owning Clip.
struct SequenceOf8 {
  std::array<std::size_t, kSequenceFrames> indices{};
};

// Splits a 25-frame clip into three disjoint 8-frame sequences covering the
// first 24 frames; the last frame is dropped so the three blocks stay
// contiguous. Throws std::invalid_argument when the clip is short,
// non-contiguous, or spans videos.
std::array<SequenceOf8, 3> segment_clip(const Clip& clip);

}  // namespace fvss::ingest
