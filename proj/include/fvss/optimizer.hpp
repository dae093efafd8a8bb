#pragma once

#include <cstdint>
#include <vector>

#include "fvss/network.hpp"
#include "fvss/tensor.hpp"

namespace fvss::opt {

struct OptimConfig {
  double base_lr = 1.6;
  int batch_size = 512;
  double weight_decay = 1e-6;
  double warmup_fraction = 0.01;
  std::int64_t total_steps = 1;
  double momentum = 0.9;          // heavy-ball coefficient
  double trust_coefficient = 1e-3;
  double epsilon = 1e-8;
  bool use_trust_ratio = true;    // off: plain SGD with weight decay
};

// Linear scaling rule: peak = base_lr * B / 256. Rejects a nonpositive batch.
double scaled_lr(double base_lr, int batch_size);

struct ScheduleState {
  std::int64_t total_steps = 1;
  std::int64_t warmup_steps = 0;  // round(warmup_fraction * total_steps)
  double peak_lr = 0.0;

  static ScheduleState from_config(const OptimConfig& cfg);
};

// Linear ramp 0 -> peak over the warmup, then cosine decay to 0 without
// restarts. Both segments equal peak_lr at the boundary. Throws on a step
// outside [0, total_steps].
double lr_at(std::int64_t step, const ScheduleState& sched);

// One LARS update on a single tensor. The velocity buffer must match the
// parameter shape. Excluded tensors (biases, rank <= 1) get a plain
// momentum-SGD update with no decay and no trust scaling.
void lars_update(nn::Tensor& param, const nn::Tensor& grad, nn::Tensor& velocity,
                 const OptimConfig& cfg, double lr, bool excluded);

// Owns per-parameter velocity buffers; applies lars_update across a
// parameter collection with rank <= 1 tensors excluded.
class LarsOptimizer {
 public:
  explicit LarsOptimizer(OptimConfig cfg) : cfg_(cfg) {}

  const OptimConfig& config() const { return cfg_; }

  void step(std::vector<nn::NamedParam>& params, const std::vector<nn::Tensor>& grads,
            double lr);

 private:
  OptimConfig cfg_;
  std::vector<nn::Tensor> velocity_;
};

}  // namespace fvss::opt
