#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fvss/frames.hpp"
#include "fvss/gaze_geometry.hpp"
#include "fvss/image.hpp"

namespace fvss::ingest {

// Raised when a ground-truth video has a frame without an attached gaze; the
// ingest driver skips the whole clip and counts it.
class MissingGazeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Where gaze locations come from: supplied with the frames, or predicted from
// an 8-frame sequence as per-frame saliency maps.
class GazeSource {
 public:
  enum class Mode { GroundTruth, Predictor };

  virtual ~GazeSource() = default;
  virtual Mode mode() const = 0;

  // Predictor mode only: one nonnegative saliency map per frame of the
  // sequence, same spatial extent as the frames.
  virtual std::array<MapF64, kSequenceFrames> predict(const Clip& clip,
                                                      const SequenceOf8& seq) const;
};

class GroundTruthGaze final : public GazeSource {
 public:
  Mode mode() const override { return Mode::GroundTruth; }
};

struct StubSaliencyConfig {
  // Motion term: positive luma change vs the previous frame, box-blurred.
  // Center prior: small Gaussian bump that decides when the scene is static.
  double center_sigma_frac = 0.2;  // sigma as a fraction of the frame side
  double center_amplitude = 0.5;   // small vs the [0,255] motion scale
  int consistency_radius = 64;     // max argmax displacement between frames
};

// Deterministic stand-in for a learned spatio-temporal gaze predictor. The
// consistency radius is enforced by construction: from the second frame on,
// saliency outside a box around the previous argmax is zeroed.
std::vector<MapF64> stub_saliency(const std::vector<const ImageU8*>& frames,
                                  const StubSaliencyConfig& cfg);

class StubSaliencyPredictor final : public GazeSource {
 public:
  explicit StubSaliencyPredictor(StubSaliencyConfig cfg = {}) : cfg_(cfg) {}
  Mode mode() const override { return Mode::Predictor; }
  std::array<MapF64, kSequenceFrames> predict(const Clip& clip,
                                              const SequenceOf8& seq) const override;

 private:
  StubSaliencyConfig cfg_;
};

// First occurrence in row-major scan order wins on ties.
geom::GazePoint argmax_row_major(const MapF64& map);

// GroundTruth mode passes the attached gazes through (throws MissingGazeError
// when one is absent); Predictor mode returns the per-frame saliency argmax.
std::array<geom::GazePoint, kSequenceFrames> resolve_gaze(const Clip& clip,
                                                          const SequenceOf8& seq,
                                                          const GazeSource& src);

}  // namespace fvss::ingest
