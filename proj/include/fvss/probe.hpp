#pragma once

#include <cstdint>
#include <span>

#include "fvss/dataset.hpp"
#include "fvss/network.hpp"

namespace fvss::eval {

struct FeatureExtractOptions {
  int input_side = 32;               // encoder input resolution
  bool center_crop = true;           // eval-time center crop before resize
  double center_crop_fraction = 0.875;
  bool train_augment = false;        // random crop/flip for probe training
  std::uint64_t seed = 0;
};

struct FeatureMatrix {
  nn::Tensor features;  // [N, F] backbone features
  std::vector<int> labels;
  std::uint64_t skipped = 0;  // unreadable images
};

// One frozen-backbone feature row per readable image. Deterministic: the
// augmentation stream for item i is derived from (seed, i), so workers could
// fan out without changing results.
FeatureMatrix extract_features(const nn::Network& frozen, const LabeledDataset& dataset,
                               std::span<const std::size_t> indices,
                               const FeatureExtractOptions& options);

struct ProbeConfig {
  int epochs = 100;
  double learning_rate = 0.5;  // cosine-decayed full-batch gradient descent
  std::uint64_t seed = 0;
};

// Multinomial logistic classifier on frozen features. Features are
// standardized with train-set statistics; labels may be arbitrary ints.
class LinearProbe {
 public:
  static LinearProbe train(const FeatureMatrix& train_data, const ProbeConfig& config);

  int num_classes() const { return static_cast<int>(class_labels_.size()); }

  std::vector<int> predict(const nn::Tensor& features) const;
  double top1_accuracy(const FeatureMatrix& data) const;  // percent
  double topk_accuracy(const FeatureMatrix& data, int k) const;

 private:
  nn::Tensor weights_;  // [C, F]
  nn::Tensor bias_;     // [C]
  nn::Tensor feature_mean_, feature_scale_;
  std::vector<int> class_labels_;  // dense index -> original label
};

}  // namespace fvss::eval
