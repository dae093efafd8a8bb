#include "fvss/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fvss::nn {

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0)
    throw std::invalid_argument("cosine similarity of a zero vector (degenerate embedding)");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

namespace {

void check_square(const Tensor& sims) {
  if (sims.rank() != 2 || sims.shape[0] != sims.shape[1] || sims.shape[0] == 0)
    throw std::invalid_argument("similarity matrix must be square and nonempty");
  for (const double s : sims.v)
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite similarity");
}

// Normalized rows or an error; degenerate embeddings are not allowed on
// either side of the loss.
Tensor unit_rows(const Tensor& raw, const char* side) {
  EmbedResult r = normalize_rows(raw);
  for (const bool d : r.degenerate)
    if (d)
      throw std::invalid_argument(std::string("degenerate ") + side +
                                  " embedding in the loss");
  return std::move(r.embeddings);
}

}  // namespace

LossReport info_nce_from_sims(const Tensor& sims, const InfoNceOptions& opt) {
  check_square(sims);
  if (!(opt.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  const std::size_t batch = sims.shape[0];

  double loss_sum = 0.0, pos_sum = 0.0, neg_sum = 0.0;
  for (std::size_t t = 0; t < batch; ++t) {
    double max_z = -1e300;
    for (std::size_t i = 0; i < batch; ++i) {
      if (!opt.denominator_includes_positive && i == t) continue;
      max_z = std::max(max_z, sims[t * batch + i] / opt.temperature);
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      if (!opt.denominator_includes_positive && i == t) continue;
      denom += std::exp(sims[t * batch + i] / opt.temperature - max_z);
      if (i != t) neg_sum += sims[t * batch + i];
    }
    const double pos_z = sims[t * batch + t] / opt.temperature;
    loss_sum += -pos_z + max_z + std::log(denom);
    pos_sum += sims[t * batch + t];
  }

  LossReport report;
  report.loss = loss_sum / static_cast<double>(batch);
  report.positive_similarity_mean = pos_sum / static_cast<double>(batch);
  report.negative_similarity_mean =
      batch > 1 ? neg_sum / static_cast<double>(batch * (batch - 1)) : 0.0;
  report.temperature = opt.temperature;
  return report;
}

LossReport info_nce(const Tensor& queries, const Tensor& keys, const InfoNceOptions& opt) {
  if (queries.rank() != 2 || !queries.same_shape(keys))
    throw std::invalid_argument("query/key batches must be equal-shaped [B, d] matrices");
  const std::size_t batch = queries.shape[0], dim = queries.shape[1];
  Tensor sims({batch, batch});
  for (std::size_t t = 0; t < batch; ++t)
    for (std::size_t i = 0; i < batch; ++i)
      sims[t * batch + i] =
          cosine_sim(std::span(queries.v).subspan(t * dim, dim),
                     std::span(keys.v).subspan(i * dim, dim));
  return info_nce_from_sims(sims, opt);
}

InfoNceGradient info_nce_gradient(const Tensor& queries_raw, const Tensor& keys_raw,
                                  const InfoNceOptions& opt) {
  if (queries_raw.rank() != 2 || !queries_raw.same_shape(keys_raw))
    throw std::invalid_argument("query/key batches must be equal-shaped [B, d] matrices");
  if (!(opt.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  const std::size_t batch = queries_raw.shape[0], dim = queries_raw.shape[1];

  const Tensor keys = unit_rows(keys_raw, "key");
  const Tensor queries = unit_rows(queries_raw, "query");
  std::vector<double> query_norms(batch);
  for (std::size_t t = 0; t < batch; ++t) {
    double n = 0.0;
    for (std::size_t d = 0; d < dim; ++d)
      n += queries_raw[t * dim + d] * queries_raw[t * dim + d];
    query_norms[t] = std::sqrt(n);
  }

  Tensor sims({batch, batch});
  for (std::size_t t = 0; t < batch; ++t)
    for (std::size_t i = 0; i < batch; ++i)
      sims[t * batch + i] = dot(queries, keys, t * dim, i * dim, dim);
  const LossReport report = info_nce_from_sims(sims, opt);

  InfoNceGradient result;
  result.report = report;
  result.dqueries = Tensor({batch, dim});
  const double inv_scale = 1.0 / (opt.temperature * static_cast<double>(batch));

  for (std::size_t t = 0; t < batch; ++t) {
    // softmax over the denominator set of this anchor
    double max_z = -1e300;
    for (std::size_t i = 0; i < batch; ++i) {
      if (!opt.denominator_includes_positive && i == t) continue;
      max_z = std::max(max_z, sims[t * batch + i] / opt.temperature);
    }
    double denom = 0.0;
    std::vector<double> expz(batch, 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
      if (!opt.denominator_includes_positive && i == t) continue;
      expz[i] = std::exp(sims[t * batch + i] / opt.temperature - max_z);
      denom += expz[i];
    }

    // dL/d(unit query), then through the normalization
    std::vector<double> dunit(dim, 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
      double coeff = expz[i] / denom;  // zero when excluded
      if (i == t) coeff -= 1.0;        // numerator term
      if (coeff == 0.0) continue;
      const double g = coeff * inv_scale;
      for (std::size_t d = 0; d < dim; ++d) dunit[d] += g * keys[i * dim + d];
    }
    double radial = 0.0;
    for (std::size_t d = 0; d < dim; ++d) radial += dunit[d] * queries[t * dim + d];
    for (std::size_t d = 0; d < dim; ++d)
      result.dqueries[t * dim + d] =
          (dunit[d] - radial * queries[t * dim + d]) / query_norms[t];
  }
  return result;
}

LossReport contrastive_backward(const Network& q_net, const Tensor& q_inputs,
                                const Tensor& k_embeddings_unit, const InfoNceOptions& opt,
                                std::vector<Tensor>& grads) {
  std::vector<Tensor> trace;
  const Tensor q_raw = q_net.forward(q_inputs, &trace);
  InfoNceGradient g = info_nce_gradient(q_raw, k_embeddings_unit, opt);
  if (!std::isfinite(g.report.loss)) throw std::runtime_error("non-finite loss");
  for (const double x : g.dqueries.v)
    if (!std::isfinite(x)) throw std::runtime_error("non-finite gradient; step rejected");
  q_net.backward(trace, g.dqueries, grads);
  return g.report;
}

}  // namespace fvss::nn
