#include "fvss/frames.hpp"

#include <stdexcept>

namespace fvss::ingest {

std::array<SequenceOf8, 3> segment_clip(const Clip& clip) {
  if (clip.frames.size() != kClipFrames)
    throw std::invalid_argument("clip must hold exactly 25 frames");
  const std::uint64_t video = clip.frames.front().video_id;
  const std::uint32_t base = clip.frames.front().frame_index;
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    if (clip.frames[i].video_id != video)
      throw std::invalid_argument("clip spans multiple videos");
    if (clip.frames[i].frame_index != base + i)
      throw std::invalid_argument("clip frame indices are not contiguous");
  }
  std::array<SequenceOf8, 3> seqs{};
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t j = 0; j < kSequenceFrames; ++j)
      seqs[s].indices[j] = s * kSequenceFrames + j;  // frame 24 is dropped
  return seqs;
}

}  // namespace fvss::ingest
