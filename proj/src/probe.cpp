#include "fvss/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fvss/augment.hpp"
#include "fvss/errors.hpp"
#include "fvss/rng.hpp"

namespace fvss::eval {

FeatureMatrix extract_features(const nn::Network& frozen, const LabeledDataset& dataset,
                               std::span<const std::size_t> indices,
                               const FeatureExtractOptions& options) {
  FeatureMatrix out;
  out.features = nn::Tensor({0, frozen.feature_dim()});

  aug::AugmentPolicy train_policy;  // crop/flip only for probe training
  train_policy.crop_scale_min = 0.5;
  train_policy.crop_scale_max = 1.0;
  train_policy.output_side = options.input_side;
  train_policy.flip_probability = 0.5;
  train_policy.jitter_probability = 0.0;
  train_policy.grayscale_probability = 0.0;
  train_policy.blur_probability = 0.0;

  std::vector<double> rows;
  for (const std::size_t index : indices) {
    const DatasetItem& item = dataset.items[index];
    ImageU8 img;
    try {
      img = load_item(dataset, item);
    } catch (const UserError&) {
      out.skipped++;
      continue;
    }

    ImageU8 view;
    if (options.train_augment) {
      Rng rng = Rng::derive(options.seed, index);
      const ImageU8 square = center_crop(img, std::min(img.width, img.height));
      aug::AugmentPolicy policy = train_policy;
      policy.output_side = std::min(options.input_side, square.width);
      view = aug::augment(square, policy, rng);
    } else if (options.center_crop) {
      const int side = std::max(
          1, static_cast<int>(std::lround(options.center_crop_fraction *
                                          std::min(img.width, img.height))));
      view = center_crop(img, side);
    } else {
      view = center_crop(img, std::min(img.width, img.height));  // square-off only
    }
    view = resize_bilinear(view, options.input_side, options.input_side);

    const nn::Tensor features = frozen.features(nn::to_input_tensor(view));
    rows.insert(rows.end(), features.v.begin(), features.v.end());
    out.labels.push_back(item.label);
  }
  out.features = nn::Tensor({out.labels.size(), frozen.feature_dim()});
  out.features.v = std::move(rows);
  return out;
}

LinearProbe LinearProbe::train(const FeatureMatrix& train_data, const ProbeConfig& config) {
  const std::size_t n = train_data.labels.size();
  if (n == 0) throw std::invalid_argument("empty probe training set");
  const std::size_t dim = train_data.features.shape[1];

  std::map<int, int> to_dense;
  for (const int label : train_data.labels) to_dense.emplace(label, 0);
  if (to_dense.size() < 2) throw std::invalid_argument("probe needs at least two classes");
  LinearProbe probe;
  for (auto& [label, dense] : to_dense) {
    dense = static_cast<int>(probe.class_labels_.size());
    probe.class_labels_.push_back(label);
  }
  const std::size_t classes = probe.class_labels_.size();

  // train-set standardization
  probe.feature_mean_ = nn::Tensor({dim});
  probe.feature_scale_ = nn::Tensor({dim});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) probe.feature_mean_[d] += train_data.features[i * dim + d];
  for (std::size_t d = 0; d < dim; ++d) probe.feature_mean_[d] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      const double c = train_data.features[i * dim + d] - probe.feature_mean_[d];
      probe.feature_scale_[d] += c * c;
    }
  for (std::size_t d = 0; d < dim; ++d)
    probe.feature_scale_[d] = 1.0 / std::sqrt(probe.feature_scale_[d] / n + 1e-8);

  nn::Tensor x({n, dim});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d)
      x[i * dim + d] =
          (train_data.features[i * dim + d] - probe.feature_mean_[d]) * probe.feature_scale_[d];

  probe.weights_ = nn::Tensor({classes, dim});
  probe.bias_ = nn::Tensor({classes});

  // full-batch gradient descent with cosine-decayed learning rate
  std::vector<double> logits(classes);
  nn::Tensor dw({classes, dim});
  nn::Tensor db({classes});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.learning_rate * 0.5 *
                      (1.0 + std::cos(3.14159265358979323846 * epoch /
                                      std::max(1, config.epochs)));
    std::fill(dw.v.begin(), dw.v.end(), 0.0);
    std::fill(db.v.begin(), db.v.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -1e300;
      for (std::size_t c = 0; c < classes; ++c) {
        logits[c] = probe.bias_[c] + nn::dot(probe.weights_, x, c * dim, i * dim, dim);
        mx = std::max(mx, logits[c]);
      }
      double denom = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        logits[c] = std::exp(logits[c] - mx);
        denom += logits[c];
      }
      const int target = to_dense.at(train_data.labels[i]);
      for (std::size_t c = 0; c < classes; ++c) {
        const double g = logits[c] / denom - (static_cast<int>(c) == target ? 1.0 : 0.0);
        db[c] += g;
        for (std::size_t d = 0; d < dim; ++d) dw[c * dim + d] += g * x[i * dim + d];
      }
    }
    const double scale = lr / static_cast<double>(n);
    for (std::size_t j = 0; j < dw.size(); ++j) probe.weights_[j] -= scale * dw[j];
    for (std::size_t c = 0; c < classes; ++c) probe.bias_[c] -= scale * db[c];
  }
  return probe;
}

std::vector<int> LinearProbe::predict(const nn::Tensor& features) const {
  const std::size_t dim = weights_.shape[1];
  if (features.rank() != 2 || features.shape[1] != dim)
    throw std::invalid_argument("feature dimension mismatch");
  const std::size_t n = features.shape[0];
  const std::size_t classes = class_labels_.size();
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = -1e300;
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      double score = bias_[c];
      for (std::size_t d = 0; d < dim; ++d)
        score += weights_[c * dim + d] * (features[i * dim + d] - feature_mean_[d]) *
                 feature_scale_[d];
      if (score > best) {
        best = score;
        best_c = c;
      }
    }
    out[i] = class_labels_[best_c];
  }
  return out;
}

double LinearProbe::top1_accuracy(const FeatureMatrix& data) const {
  return topk_accuracy(data, 1);
}

double LinearProbe::topk_accuracy(const FeatureMatrix& data, int k) const {
  const std::size_t n = data.labels.size();
  if (n == 0) throw std::invalid_argument("empty evaluation set");
  const std::size_t dim = weights_.shape[1];
  const std::size_t classes = class_labels_.size();
  const std::size_t keep = std::min<std::size_t>(k, classes);

  std::size_t hits = 0;
  std::vector<std::pair<double, int>> scored(classes);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      double score = bias_[c];
      for (std::size_t d = 0; d < dim; ++d)
        score += weights_[c * dim + d] * (data.features[i * dim + d] - feature_mean_[d]) *
                 feature_scale_[d];
      scored[c] = {score, class_labels_[c]};
    }
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; j < keep; ++j)
      if (scored[j].second == data.labels[i]) {
        hits++;
        break;
      }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace fvss::eval
