#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fvss/checkpoint.hpp"
#include "fvss/errors.hpp"
#include "fvss/trainer.hpp"

using namespace fvss;
using namespace fvss::nn;
namespace fs = std::filesystem;

namespace {

EncoderConfig tiny_encoder(int side) {
  EncoderConfig cfg;
  cfg.input_side = side;
  cfg.backbone = "conv:4:3:2:1,relu,conv:8:3:2:1,relu,gap";
  cfg.projection_hidden = 16;
  cfg.projection_dim = 8;
  return cfg;
}

Batch random_batch(const EncoderConfig& cfg, std::size_t batch, Rng& rng) {
  Batch b;
  b.views_q = Tensor({batch, 3, static_cast<std::size_t>(cfg.input_side),
                      static_cast<std::size_t>(cfg.input_side)});
  b.views_k = Tensor::zeros_like(b.views_q);
  for (double& v : b.views_q.v) v = rng.uniform();
  // keys: noisy copies of the queries, so positives carry signal
  for (std::size_t i = 0; i < b.views_k.size(); ++i)
    b.views_k[i] = std::clamp(b.views_q[i] + 0.05 * rng.normal(), 0.0, 1.0);
  return b;
}

// Two solid-color videos with per-frame noise: color identifies the video,
// so contrastive training over temporal pairs has a learnable signal.
std::vector<ingest::FrameRecord> two_color_records(int per_video, int side, Rng& rng) {
  std::vector<ingest::FrameRecord> records;
  for (int video = 0; video < 2; ++video)
    for (int i = 0; i < per_video; ++i) {
      ingest::FrameRecord rec;
      rec.video_id = static_cast<std::uint64_t>(video);
      rec.frame_index = static_cast<std::uint32_t>(i);
      rec.timestamp_ms = rec.frame_index * 200;
      rec.pixels = ImageU8(side, side);
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
          const int noise = static_cast<int>(rng.next_below(40));
          rec.pixels.at(x, y, 0) = static_cast<std::uint8_t>(video == 0 ? 200 - noise : noise);
          rec.pixels.at(x, y, 1) = static_cast<std::uint8_t>(60 + noise);
          rec.pixels.at(x, y, 2) = static_cast<std::uint8_t>(video == 1 ? 200 - noise : noise);
        }
      records.push_back(std::move(rec));
    }
  return records;
}

bool states_identical(const EncoderState& a, const EncoderState& b) {
  auto qa = a.query.parameters();
  auto qb = b.query.parameters();
  auto ka = a.key.parameters();
  auto kb = b.key.parameters();
  if (qa.size() != qb.size() || ka.size() != kb.size()) return false;
  for (std::size_t i = 0; i < qa.size(); ++i)
    if (qa[i].tensor->v != qb[i].tensor->v) return false;
  for (std::size_t i = 0; i < ka.size(); ++i)
    if (ka[i].tensor->v != kb[i].tensor->v) return false;
  return true;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("train_step is bit-deterministic from identical state and batch") {
  const EncoderConfig cfg = tiny_encoder(12);
  Rng rng(71);
  EncoderState s1 = make_encoder_state(cfg, rng);
  EncoderState s2 = s1;
  Rng batch_rng(72);
  const Batch batch = random_batch(cfg, 4, batch_rng);

  opt::OptimConfig ocfg;
  ocfg.total_steps = 10;
  opt::LarsOptimizer opt1(ocfg), opt2(ocfg);
  const TrainStepOptions step_opt;
  const LossReport r1 = train_step(batch, s1, opt1, 0.05, step_opt);
  const LossReport r2 = train_step(batch, s2, opt2, 0.05, step_opt);
  CHECK(r1.loss == r2.loss);
  CHECK(states_identical(s1, s2));
}

TEST_CASE("theta_k after the step equals the ema of post-optimizer theta_q") {
  const EncoderConfig cfg = tiny_encoder(12);
  Rng rng(73);
  EncoderState state = make_encoder_state(cfg, rng);
  // detach the copies so the ema has something to move
  for (auto& p : state.key.parameters())
    for (double& v : p.tensor->v) v += 0.1;
  std::vector<std::vector<double>> k_before;
  for (auto& p : state.key.parameters()) k_before.push_back(p.tensor->v);

  Rng batch_rng(74);
  const Batch batch = random_batch(cfg, 4, batch_rng);
  opt::OptimConfig ocfg;
  ocfg.total_steps = 10;
  opt::LarsOptimizer optimizer(ocfg);
  TrainStepOptions step_opt;
  step_opt.ema_momentum = 0.9;
  train_step(batch, state, optimizer, 0.05, step_opt);

  const double m = 0.9;
  auto q_after = state.query.parameters();
  auto k_after = state.key.parameters();
  for (std::size_t i = 0; i < q_after.size(); ++i)
    for (std::size_t j = 0; j < q_after[i].tensor->size(); ++j) {
      const double expected = m * k_before[i][j] + (1.0 - m) * (*q_after[i].tensor)[j];
      CHECK((*k_after[i].tensor)[j] == expected);
    }
}

TEST_CASE("gradients flow only into theta_q; the key encoder moves by ema alone") {
  const EncoderConfig cfg = tiny_encoder(12);
  Rng rng(75);
  EncoderState state = make_encoder_state(cfg, rng);
  Rng batch_rng(76);
  const Batch batch = random_batch(cfg, 4, batch_rng);
  opt::OptimConfig ocfg;
  ocfg.total_steps = 10;
  opt::LarsOptimizer optimizer(ocfg);
  TrainStepOptions step_opt;
  step_opt.ema_momentum = 1.0;  // ema frozen: theta_k must not move at all
  std::vector<std::vector<double>> k_before;
  for (auto& p : state.key.parameters()) k_before.push_back(p.tensor->v);
  train_step(batch, state, optimizer, 0.05, step_opt);
  auto k_after = state.key.parameters();
  for (std::size_t i = 0; i < k_after.size(); ++i) CHECK(k_after[i].tensor->v == k_before[i]);
}

TEST_CASE("loss decreases on a fixed tiny dataset") {
  Rng rng(77);
  const auto records = two_color_records(64, 16, rng);

  TrainLoopConfig cfg;
  cfg.encoder = tiny_encoder(12);
  cfg.policy = aug::PairAugmentPolicy::mocov3(12);
  cfg.window = {1.0, 5};
  cfg.optim.base_lr = 0.8;
  cfg.optim.batch_size = 16;
  cfg.optim.trust_coefficient = 0.02;
  cfg.epochs = 25;  // 8 steps per epoch -> 200 steps
  cfg.batch_size = 16;
  cfg.seed = 7;

  const TrainResult result = run_training(records, cfg);
  REQUIRE(result.curve.size() == 200);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 20; ++i) {
    head += result.curve[i].loss;
    tail += result.curve[result.curve.size() - 20 + i].loss;
  }
  CHECK(tail / 20.0 < head / 20.0);
}

TEST_CASE("rerun with the same seed gives a bit-identical checkpoint") {
  Rng rng(79);
  const auto records = two_color_records(24, 16, rng);
  TrainLoopConfig cfg;
  cfg.encoder = tiny_encoder(12);
  cfg.policy = aug::PairAugmentPolicy::mocov3(12);
  cfg.window = {1.0, 5};
  cfg.optim.batch_size = 8;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.seed = 99;

  const TrainResult a = run_training(records, cfg);
  const TrainResult b = run_training(records, cfg);
  CHECK(states_identical(a.state, b.state));
  REQUIRE(a.replay_log.size() == b.replay_log.size());
  for (std::size_t i = 0; i < a.replay_log.size(); ++i)
    CHECK(a.replay_log[i].seed == b.replay_log[i].seed);

  const fs::path dir = fs::temp_directory_path() / "fvss_ckpt_rt";
  fs::create_directories(dir);
  save_checkpoint(a.state, dir / "a.fvck");
  save_checkpoint(b.state, dir / "b.fvck");
  std::ifstream fa(dir / "a.fvck", std::ios::binary), fb(dir / "b.fvck", std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                            std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
}

TEST_CASE("zero temporal window pairs every anchor with itself") {
  Rng rng(81);
  const auto records = two_color_records(16, 16, rng);
  TrainLoopConfig cfg;
  cfg.encoder = tiny_encoder(12);
  cfg.policy = aug::PairAugmentPolicy::mocov3(12);
  cfg.window = {0.0, 5};
  cfg.optim.batch_size = 8;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  const TrainResult result = run_training(records, cfg);
  CHECK(result.pairs_total > 0);
  CHECK(result.pairs_self == result.pairs_total);
}

TEST_CASE("checkpoint round-trips and rejects corruption") {
  const EncoderConfig cfg = tiny_encoder(10);
  Rng rng(83);
  EncoderState state = make_encoder_state(cfg, rng);
  for (auto& p : state.key.parameters())
    for (double& v : p.tensor->v) v += 0.25;

  const fs::path dir = fs::temp_directory_path() / "fvss_ckpt_corrupt";
  fs::create_directories(dir);
  const fs::path path = dir / "state.fvck";
  save_checkpoint(state, path);

  const EncoderState loaded = load_checkpoint(path);
  CHECK(states_identical(state, loaded));
  CHECK(loaded.query.config().descriptor() == cfg.descriptor());

  // flip a byte in the middle -> crc mismatch
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(100);
  f.put('\x7f');
  f.close();
  CHECK_THROWS_AS(load_checkpoint(path), UserError);
}

TEST_CASE("symmetrized loss still trains and stays deterministic") {
  Rng rng(85);
  const auto records = two_color_records(16, 16, rng);
  TrainLoopConfig cfg;
  cfg.encoder = tiny_encoder(12);
  cfg.policy = aug::PairAugmentPolicy::mocov3(12);
  cfg.window = {1.0, 5};
  cfg.optim.batch_size = 8;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  cfg.step.symmetrize_loss = true;
  const TrainResult a = run_training(records, cfg);
  const TrainResult b = run_training(records, cfg);
  CHECK(states_identical(a.state, b.state));
  CHECK(a.curve.front().loss > 0.0);
}

}  // TEST_SUITE
