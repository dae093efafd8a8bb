#include "fvss/gaze_source.hpp"

#include <algorithm>
#include <cmath>

namespace fvss::ingest {

std::array<MapF64, kSequenceFrames> GazeSource::predict(const Clip&, const SequenceOf8&) const {
  throw std::logic_error("gaze source has no predictor");
}

geom::GazePoint argmax_row_major(const MapF64& map) {
  geom::GazePoint best{0, 0};
  double best_val = map.at(0, 0);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x)
      if (map.at(x, y) > best_val) {
        best_val = map.at(x, y);
        best = {x, y};
      }
  return best;
}

namespace {

MapF64 box_blur3(const MapF64& in) {
  MapF64 out(in.width, in.height);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx >= 0 && xx < in.width && yy >= 0 && yy < in.height) {
            sum += in.at(xx, yy);
            count++;
          }
        }
      out.at(x, y) = sum / count;
    }
  return out;
}

}  // namespace

std::vector<MapF64> stub_saliency(const std::vector<const ImageU8*>& frames,
                                  const StubSaliencyConfig& cfg) {
  std::vector<MapF64> maps;
  if (frames.empty()) return maps;
  const int w = frames[0]->width, h = frames[0]->height;

  MapF64 center_prior(w, h);
  const double sigma = cfg.center_sigma_frac * std::max(w, h);
  const double cx = w / 2.0, cy = h / 2.0;
  // Peak lands exactly on the (w/2, h/2) pixel for even sides.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - std::floor(cx), dy = y - std::floor(cy);
      center_prior.at(x, y) = cfg.center_amplitude * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
    }

  std::vector<MapF64> lumas;
  lumas.reserve(frames.size());
  for (const ImageU8* f : frames) lumas.push_back(luma(*f));

  geom::GazePoint prev{0, 0};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    MapF64 motion(w, h);
    // Positive luma change vs the previous frame; the first frame diffs
    // against the second so a moving target is visible from frame 0.
    const std::size_t other = (i == 0) ? std::min<std::size_t>(1, frames.size() - 1) : i - 1;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        motion.at(x, y) = std::max(0.0, lumas[i].at(x, y) - lumas[other].at(x, y));
    motion = box_blur3(motion);

    MapF64 map(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) map.at(x, y) = motion.at(x, y) + center_prior.at(x, y);

    if (i > 0) {
      // Temporal consistency: zero saliency outside the radius box around the
      // previous argmax, bounding the displacement by construction.
      const int r = cfg.consistency_radius;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (std::abs(x - prev.x) > r || std::abs(y - prev.y) > r) map.at(x, y) = 0.0;
    }
    prev = argmax_row_major(map);
    maps.push_back(std::move(map));
  }
  return maps;
}

std::array<MapF64, kSequenceFrames> StubSaliencyPredictor::predict(const Clip& clip,
                                                                   const SequenceOf8& seq) const {
  std::vector<const ImageU8*> frames;
  frames.reserve(kSequenceFrames);
  for (std::size_t idx : seq.indices) frames.push_back(&clip.frames.at(idx).pixels);
  std::vector<MapF64> maps = stub_saliency(frames, cfg_);
  std::array<MapF64, kSequenceFrames> out;
  for (std::size_t i = 0; i < kSequenceFrames; ++i) out[i] = std::move(maps[i]);
  return out;
}

std::array<geom::GazePoint, kSequenceFrames> resolve_gaze(const Clip& clip,
                                                          const SequenceOf8& seq,
                                                          const GazeSource& src) {
  std::array<geom::GazePoint, kSequenceFrames> gazes{};
  if (src.mode() == GazeSource::Mode::GroundTruth) {
    for (std::size_t i = 0; i < kSequenceFrames; ++i) {
      const FrameRecord& rec = clip.frames.at(seq.indices[i]);
      if (!rec.has_gaze)
        throw MissingGazeError("frame " + std::to_string(rec.frame_index) +
                               " has no ground-truth gaze");
      gazes[i] = rec.gaze;
    }
    return gazes;
  }
  const std::array<MapF64, kSequenceFrames> maps = src.predict(clip, seq);
  for (std::size_t i = 0; i < kSequenceFrames; ++i) gazes[i] = argmax_row_major(maps[i]);
  return gazes;
}

}  // namespace fvss::ingest
