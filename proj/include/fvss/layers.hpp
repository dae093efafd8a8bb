#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fvss/rng.hpp"
#include "fvss/tensor.hpp"

namespace fvss::nn {

// Per-sample activation shape; spatial layers use {C, H, W}, dense ones {D}.
using Shape = std::vector<std::size_t>;

// One differentiable stage with hand-written forward and reverse passes.
// Parameters live inside the layer; backward accumulates parameter gradients
// into param_grads (same order as params()) and returns dL/d(input).
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual std::string spec_token() const = 0;  // canonical descriptor token
  virtual const Shape& input_shape() const = 0;
  virtual const Shape& output_shape() const = 0;

  virtual Tensor forward(const Tensor& in) const = 0;
  virtual Tensor backward(const Tensor& in, const Tensor& out, const Tensor& dout,
                          std::span<Tensor> param_grads) const = 0;

  virtual std::vector<Tensor*> params() { return {}; }
  virtual std::vector<const Tensor*> params() const { return {}; }
  virtual void init_params(Rng&) {}

  virtual std::unique_ptr<Layer> clone() const = 0;
};

// Registered layer kinds: conv, dense, relu, tanh, maxpool, avgpool, gap,
// flatten. Tokens look like `conv:8:3:2:1` (out:k:stride:pad), `dense:64`,
// `maxpool:2`, or a bare name.
const std::vector<std::string>& registered_layer_kinds();

// Builds one layer from a descriptor token given the incoming per-sample
// shape. Throws std::invalid_argument on unknown kinds or shape mismatches.
std::unique_ptr<Layer> make_layer(const std::string& token, const Shape& input_shape);

}  // namespace fvss::nn
