#include "fvss/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace fvss::opt {

double scaled_lr(double base_lr, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (!(base_lr > 0.0)) throw std::invalid_argument("base learning rate must be positive");
  return base_lr * static_cast<double>(batch_size) / 256.0;
}

ScheduleState ScheduleState::from_config(const OptimConfig& cfg) {
  if (cfg.total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
  if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction >= 1.0)
    throw std::invalid_argument("warmup_fraction must be in [0, 1)");
  ScheduleState s;
  s.total_steps = cfg.total_steps;
  s.warmup_steps = static_cast<std::int64_t>(
      std::floor(cfg.warmup_fraction * static_cast<double>(cfg.total_steps) + 0.5));
  s.peak_lr = scaled_lr(cfg.base_lr, cfg.batch_size);
  return s;
}

double lr_at(std::int64_t step, const ScheduleState& sched) {
  if (step < 0 || step > sched.total_steps) throw std::invalid_argument("step out of range");
  if (step < sched.warmup_steps)
    return sched.peak_lr * static_cast<double>(step) / static_cast<double>(sched.warmup_steps);
  if (sched.total_steps == sched.warmup_steps) return sched.peak_lr;
  const double progress = static_cast<double>(step - sched.warmup_steps) /
                          static_cast<double>(sched.total_steps - sched.warmup_steps);
  return sched.peak_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

void lars_update(nn::Tensor& param, const nn::Tensor& grad, nn::Tensor& velocity,
                 const OptimConfig& cfg, double lr, bool excluded) {
  if (!param.same_shape(grad) || !param.same_shape(velocity))
    throw std::invalid_argument("parameter/gradient/velocity shape mismatch");
  if (lr < 0.0) throw std::invalid_argument("negative learning rate");
  for (const double g : grad.v)
    if (!std::isfinite(g)) throw std::invalid_argument("non-finite gradient");

  if (excluded) {
    // plain momentum SGD, no decay, no trust scaling
    for (std::size_t i = 0; i < param.size(); ++i) {
      velocity[i] = cfg.momentum * velocity[i] + lr * grad[i];
      param[i] -= velocity[i];
    }
    return;
  }

  double wn = 0.0, gn = 0.0;
  for (std::size_t i = 0; i < param.size(); ++i) {
    wn += param[i] * param[i];
    gn += grad[i] * grad[i];
  }
  wn = std::sqrt(wn);
  gn = std::sqrt(gn);

  double trust = 1.0;
  if (cfg.use_trust_ratio && wn > 0.0)
    trust = cfg.trust_coefficient * wn / (gn + cfg.weight_decay * wn + cfg.epsilon);

  for (std::size_t i = 0; i < param.size(); ++i) {
    const double update = grad[i] + cfg.weight_decay * param[i];
    velocity[i] = cfg.momentum * velocity[i] + lr * trust * update;
    param[i] -= velocity[i];
  }
}

void LarsOptimizer::step(std::vector<nn::NamedParam>& params,
                         const std::vector<nn::Tensor>& grads, double lr) {
  if (params.size() != grads.size())
    throw std::invalid_argument("parameter/gradient count mismatch");
  if (velocity_.empty()) {
    velocity_.reserve(params.size());
    for (const auto& p : params) velocity_.push_back(nn::Tensor::zeros_like(*p.tensor));
  }
  if (velocity_.size() != params.size())
    throw std::invalid_argument("optimizer state does not match the parameter set");
  for (std::size_t i = 0; i < params.size(); ++i)
    lars_update(*params[i].tensor, grads[i], velocity_[i], cfg_, lr,
                params[i].tensor->rank() <= 1);
}

}  // namespace fvss::opt
