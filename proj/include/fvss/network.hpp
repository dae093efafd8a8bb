#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fvss/image.hpp"
#include "fvss/layers.hpp"
#include "fvss/rng.hpp"
#include "fvss/tensor.hpp"

namespace fvss::nn {

// Backbone plus two-layer projection head. The descriptor round-trips through
// checkpoints: `in:3x32x32;backbone=conv:8:3:2:1,relu,gap;head=64,16`.
struct EncoderConfig {
  int input_side = 32;
  int input_channels = 3;
  std::string backbone = "conv:8:3:2:1,relu,conv:16:3:2:1,relu,conv:32:3:2:1,relu,gap";
  int projection_hidden = 64;
  int projection_dim = 16;

  std::string descriptor() const;
  static EncoderConfig from_descriptor(const std::string& descriptor);
};

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

struct NamedParamView {
  std::string name;
  const Tensor* tensor;
};

// A built encoder: the backbone ends at a flat feature vector (a flatten
// stage is appended automatically when the descriptor ends spatial), then the
// projection head follows. Value semantics via clone().
class Network {
 public:
  Network() = default;
  Network(const Network& o) { *this = o; }
  Network& operator=(const Network& o);
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  static Network build(const EncoderConfig& cfg);

  void init_params(Rng& rng);

  const EncoderConfig& config() const { return cfg_; }
  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t embed_dim() const { return static_cast<std::size_t>(cfg_.projection_dim); }
  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  // trace, when given, receives the input and every intermediate activation
  // (layer_count() + 1 tensors) for the reverse pass.
  Tensor forward(const Tensor& input, std::vector<Tensor>* trace = nullptr) const;

  // Backbone output, one flat row per sample.
  Tensor features(const Tensor& input) const;

  // Accumulates dL/dparams into grads (parallel to parameters()) given a
  // trace from forward() and dL/d(output).
  void backward(const std::vector<Tensor>& trace, const Tensor& dout,
                std::vector<Tensor>& grads) const;

  std::vector<NamedParam> parameters();
  std::vector<NamedParamView> parameters() const;
  std::vector<Tensor> zero_grads() const;

 private:
  EncoderConfig cfg_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::size_t backbone_end_ = 0;
  std::size_t feature_dim_ = 0;
};

// Batch of images to a [B, C, side, side] input tensor scaled to [0, 1].
Tensor to_input_tensor(std::span<const ImageU8* const> images);
Tensor to_input_tensor(const ImageU8& image);

// Unit-normalized embeddings; rows whose pre-normalization norm is ~0 are
// flagged degenerate and left as zeros.
struct EmbedResult {
  Tensor embeddings;  // [B, d]
  std::vector<bool> degenerate;
};

EmbedResult embed(const Network& net, const Tensor& input_batch);

// In-place row normalization of raw network outputs; same degeneracy rule.
EmbedResult normalize_rows(const Tensor& raw);

}  // namespace fvss::nn
