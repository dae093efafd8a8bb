#pragma once

#include <span>

#include "fvss/network.hpp"
#include "fvss/tensor.hpp"

namespace fvss::nn {

// Cosine similarity in [-1, 1]; throws std::invalid_argument on a zero
// vector (degenerate embedding).
double cosine_sim(std::span<const double> a, std::span<const double> b);

struct InfoNceOptions {
  double temperature = 0.1;
  // Eq.-style denominator over all keys of the batch, positive included.
  bool denominator_includes_positive = true;
};

struct LossReport {
  double loss = 0.0;
  double positive_similarity_mean = 0.0;
  double negative_similarity_mean = 0.0;  // 0 when B == 1
  double temperature = 0.0;
};

// Loss from a precomputed [B, B] similarity matrix (sims[t][i] = similarity
// of query t and key i; the diagonal holds the positives). Numerically
// stabilized by max-subtraction, so adding a constant to one anchor's row
// leaves the loss unchanged.
LossReport info_nce_from_sims(const Tensor& sims, const InfoNceOptions& opt);

// Cosine-similarity route over raw embedding matrices [B, d].
LossReport info_nce(const Tensor& queries, const Tensor& keys, const InfoNceOptions& opt);

// Fused forward/backward: mean InfoNCE over the batch plus dL/d(raw query
// outputs). Keys are constants (the momentum path carries no gradient).
struct InfoNceGradient {
  LossReport report;
  Tensor dqueries;  // [B, d], w.r.t. the raw (pre-normalization) outputs
};

InfoNceGradient info_nce_gradient(const Tensor& queries_raw, const Tensor& keys_raw,
                                  const InfoNceOptions& opt);

// Forward q_net on the query inputs, evaluate the loss against fixed key
// embeddings, and accumulate exact parameter gradients (grads parallel to
// q_net.parameters()).
LossReport contrastive_backward(const Network& q_net, const Tensor& q_inputs,
                                const Tensor& k_embeddings_unit, const InfoNceOptions& opt,
                                std::vector<Tensor>& grads);

}  // namespace fvss::nn
