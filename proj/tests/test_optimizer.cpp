#include <cmath>

#include "doctest.h"
#include "fvss/optimizer.hpp"
#include "fvss/rng.hpp"
#include "fvss/trainer.hpp"

using namespace fvss;
using namespace fvss::nn;
using namespace fvss::opt;

TEST_SUITE("optimizer") {

TEST_CASE("linear lr scaling rule") {
  CHECK(scaled_lr(1.6, 512) == 3.2);
  CHECK(scaled_lr(1.6, 256) == 1.6);
  CHECK_THROWS_AS(scaled_lr(1.6, 0), std::invalid_argument);
  CHECK_THROWS_AS(scaled_lr(0.0, 256), std::invalid_argument);
}

TEST_CASE("cosine schedule with warmup") {
  OptimConfig cfg;
  cfg.base_lr = 1.6;
  cfg.batch_size = 512;
  cfg.warmup_fraction = 0.01;
  cfg.total_steps = 10000;
  const ScheduleState sched = ScheduleState::from_config(cfg);
  CHECK(sched.warmup_steps == 100);
  CHECK(sched.peak_lr == 3.2);

  CHECK(lr_at(0, sched) == 0.0);                       // ramps from zero
  CHECK(lr_at(sched.warmup_steps, sched) == 3.2);      // exact at the boundary
  CHECK(lr_at(sched.warmup_steps - 1, sched) ==
        doctest::Approx(3.2 * 99.0 / 100.0).epsilon(1e-15));
  CHECK(lr_at(cfg.total_steps, sched) < 1e-12);        // cos(pi) = -1

  const std::int64_t mid = sched.warmup_steps + (cfg.total_steps - sched.warmup_steps) / 2;
  CHECK(lr_at(mid, sched) == doctest::Approx(1.6).epsilon(1e-12));  // cos(pi/2) = 0

  // nonincreasing on the decay segment
  double prev = lr_at(sched.warmup_steps, sched);
  for (std::int64_t s = sched.warmup_steps + 1; s <= cfg.total_steps; s += 7) {
    const double lr = lr_at(s, sched);
    CHECK(lr <= prev + 1e-15);
    prev = lr;
  }
  CHECK_THROWS_AS(lr_at(-1, sched), std::invalid_argument);
  CHECK_THROWS_AS(lr_at(cfg.total_steps + 1, sched), std::invalid_argument);
}

TEST_CASE("warmup step count uses round-half-up") {
  OptimConfig cfg;
  cfg.total_steps = 250;
  cfg.warmup_fraction = 0.01;  // 2.5 -> 3
  CHECK(ScheduleState::from_config(cfg).warmup_steps == 3);
  cfg.total_steps = 240;  // 2.4 -> 2
  CHECK(ScheduleState::from_config(cfg).warmup_steps == 2);
}

TEST_CASE("lars: zero gradient and zero decay leave parameters unchanged") {
  Tensor w({3, 3});
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 * static_cast<double>(i);
  const Tensor g = Tensor::zeros_like(w);
  Tensor vel = Tensor::zeros_like(w);
  OptimConfig cfg;
  cfg.weight_decay = 0.0;
  cfg.momentum = 0.0;
  const Tensor before = w;
  lars_update(w, g, vel, cfg, 0.1, false);
  CHECK(w.v == before.v);
}

TEST_CASE("lars single-element hand computation") {
  // w=1, g=0.5, wd=0, trust=1, lr=0.1, momentum=0:
  // eta = 1*1/(0.5 + 0 + eps) ~= 2, update = 0.1*2*0.5 = 0.1, w' = 0.9
  Tensor w({1, 1});
  w[0] = 1.0;
  Tensor g({1, 1});
  g[0] = 0.5;
  Tensor vel({1, 1});
  OptimConfig cfg;
  cfg.weight_decay = 0.0;
  cfg.trust_coefficient = 1.0;
  cfg.momentum = 0.0;
  lars_update(w, g, vel, cfg, 0.1, false);
  CHECK(w[0] == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("lars update norm identity for a unit-norm gradient") {
  Rng rng(53);
  Tensor w({4, 4});
  for (double& v : w.v) v = rng.normal();
  Tensor g({4, 4});
  double gn = 0.0;
  for (double& v : g.v) {
    v = rng.normal();
    gn += v * v;
  }
  gn = std::sqrt(gn);
  for (double& v : g.v) v /= gn;  // ||g|| = 1

  double wn = 0.0;
  for (const double v : w.v) wn += v * v;
  wn = std::sqrt(wn);

  OptimConfig cfg;
  cfg.weight_decay = 0.0;
  cfg.trust_coefficient = 1e-3;
  cfg.momentum = 0.0;
  const Tensor before = w;
  Tensor vel = Tensor::zeros_like(w);
  lars_update(w, g, vel, cfg, 0.2, false);

  double un = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) un += (before[i] - w[i]) * (before[i] - w[i]);
  un = std::sqrt(un);
  CHECK(un == doctest::Approx(0.2 * cfg.trust_coefficient * wn).epsilon(1e-6));
}

TEST_CASE("lars with trust disabled and no momentum is sgd with weight decay") {
  Rng rng(59);
  Tensor w({5, 2});
  Tensor g({5, 2});
  for (double& v : w.v) v = rng.normal();
  for (double& v : g.v) v = rng.normal();
  Tensor vel = Tensor::zeros_like(w);
  OptimConfig cfg;
  cfg.weight_decay = 0.01;
  cfg.momentum = 0.0;
  cfg.use_trust_ratio = false;
  const Tensor before = w;
  lars_update(w, g, vel, cfg, 0.05, false);
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(w[i] == before[i] - 0.05 * (g[i] + 0.01 * before[i]));
}

TEST_CASE("excluded tensors get plain sgd updates without decay") {
  Tensor b({4});
  Tensor g({4});
  for (std::size_t i = 0; i < 4; ++i) {
    b[i] = 1.0;
    g[i] = 0.5;
  }
  Tensor vel = Tensor::zeros_like(b);
  OptimConfig cfg;
  cfg.weight_decay = 10.0;  // must not apply
  cfg.momentum = 0.0;
  lars_update(b, g, vel, cfg, 0.1, true);
  for (std::size_t i = 0; i < 4; ++i) CHECK(b[i] == doctest::Approx(0.95));
}

TEST_CASE("lars momentum accumulates heavy-ball style") {
  Tensor w({2, 2});
  Tensor g({2, 2});
  for (double& v : g.v) v = 1.0;
  Tensor vel = Tensor::zeros_like(w);
  OptimConfig cfg;
  cfg.weight_decay = 0.0;
  cfg.momentum = 0.5;
  cfg.use_trust_ratio = false;
  lars_update(w, g, vel, cfg, 0.1, false);  // v = 0.1, w = -0.1
  lars_update(w, g, vel, cfg, 0.1, false);  // v = 0.15, w = -0.25
  for (const double v : w.v) CHECK(v == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("non-finite gradients are rejected") {
  Tensor w({2});
  Tensor g({2});
  g[0] = std::numeric_limits<double>::quiet_NaN();
  Tensor vel = Tensor::zeros_like(w);
  CHECK_THROWS_AS(lars_update(w, g, vel, OptimConfig{}, 0.1, true), std::invalid_argument);
}

TEST_CASE("ema worked example and endpoint behavior") {
  EncoderConfig cfg;
  cfg.input_side = 6;
  cfg.backbone = "flatten,dense:4,relu";
  cfg.projection_hidden = 3;
  cfg.projection_dim = 2;
  Rng rng(61);
  EncoderState state = make_encoder_state(cfg, rng);

  // theta_k = 0, theta_q = 1, m = 0.996 -> theta_k = 0.004
  for (auto& p : state.query.parameters())
    for (double& v : p.tensor->v) v = 1.0;
  for (auto& p : state.key.parameters())
    for (double& v : p.tensor->v) v = 0.0;
  ema_update(state, 0.996);
  for (auto& p : state.key.parameters())
    for (double v : p.tensor->v) CHECK(v == doctest::Approx(0.004).epsilon(1e-15));

  // m = 1 leaves theta_k unchanged
  EncoderState frozen = state;
  ema_update(frozen, 1.0);
  auto a = state.key.parameters();
  auto b = frozen.key.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].tensor->v == b[i].tensor->v);

  CHECK_THROWS_AS(ema_update(state, 1.5), std::invalid_argument);
}

TEST_CASE("ema distance to a constant query decays exactly like m^n") {
  EncoderConfig cfg;
  cfg.input_side = 8;
  cfg.backbone = "conv:4:3:2:1,relu,gap";
  cfg.projection_hidden = 6;
  cfg.projection_dim = 4;
  Rng rng(67);
  EncoderState state = make_encoder_state(cfg, rng);
  // separate the two copies
  for (auto& p : state.key.parameters())
    for (double& v : p.tensor->v) v += 0.37;

  auto distance = [&]() {
    double acc = 0.0;
    auto q = state.query.parameters();
    auto k = state.key.parameters();
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t j = 0; j < q[i].tensor->size(); ++j) {
        const double d = (*k[i].tensor)[j] - (*q[i].tensor)[j];
        acc += d * d;
      }
    return std::sqrt(acc);
  };

  const double m = 0.996;
  const double initial = distance();
  const int steps = 200;
  for (int s = 0; s < steps; ++s) ema_update(state, m);
  const double expected = initial * std::pow(m, steps);
  CHECK(std::abs(distance() - expected) / expected < 1e-9);
}

}  // TEST_SUITE
