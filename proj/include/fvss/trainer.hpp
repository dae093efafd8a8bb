#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "fvss/augment.hpp"
#include "fvss/frames.hpp"
#include "fvss/loss.hpp"
#include "fvss/network.hpp"
#include "fvss/optimizer.hpp"

namespace fvss::nn {

// Query encoder plus its momentum twin. theta_k starts as a copy of theta_q
// and is only ever moved by ema_update.
struct EncoderState {
  Network query;
  Network key;
};

EncoderState make_encoder_state(const EncoderConfig& cfg, Rng& rng);

// theta_k <- m * theta_k + (1 - m) * theta_q, elementwise; theta_q untouched.
void ema_update(EncoderState& state, double momentum);

// Paired views; index i of views_k is the positive for index i of views_q.
struct Batch {
  Tensor views_q;
  Tensor views_k;
};

struct TrainStepOptions {
  InfoNceOptions loss;
  double ema_momentum = 0.996;
  // Also evaluates the loss with the roles of the two views swapped
  // (two-directional form); off by default.
  bool symmetrize_loss = false;
};

// Forward both encoders, backprop into theta_q only, one optimizer step,
// then the EMA update. Strictly sequential in state.
LossReport train_step(const Batch& batch, EncoderState& state, opt::LarsOptimizer& optimizer,
                      double lr, const TrainStepOptions& opt);

struct TrainLoopConfig {
  EncoderConfig encoder;
  aug::PairAugmentPolicy policy = aug::PairAugmentPolicy::mocov3(32);
  aug::TemporalWindow window;
  opt::OptimConfig optim;  // total_steps is derived from the data and epochs
  TrainStepOptions step;
  int epochs = 1;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct LossCurveRow {
  std::int64_t step;
  double loss;
  double pos_sim;
  double neg_sim;
  double lr;
};

struct ReplayLogRow {
  std::int64_t batch_index;
  std::uint64_t seed;
};

struct TrainResult {
  EncoderState state;
  std::vector<LossCurveRow> curve;
  std::vector<ReplayLogRow> replay_log;
  std::uint64_t pairs_total = 0;
  std::uint64_t pairs_self = 0;  // neighbor == anchor (degenerate window)
};

// Shuffled epochs over the records; anchors pair with a uniform temporal
// neighbor among the records present in the window (gaps from the dropped
// 25th frames are respected). Deterministic under the seed.
TrainResult run_training(const std::vector<ingest::FrameRecord>& records,
                         const TrainLoopConfig& cfg);

void write_loss_csv(const std::vector<LossCurveRow>& curve, std::ostream& out);
void write_replay_log(const std::vector<ReplayLogRow>& log, std::ostream& out);

}  // namespace fvss::nn
