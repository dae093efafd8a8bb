#include "fvss/trainer.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace fvss::nn {

EncoderState make_encoder_state(const EncoderConfig& cfg, Rng& rng) {
  EncoderState state;
  state.query = Network::build(cfg);
  state.query.init_params(rng);
  state.key = state.query;  // identical shapes and values at start
  return state;
}

void ema_update(EncoderState& state, double momentum) {
  if (momentum < 0.0 || momentum > 1.0)
    throw std::invalid_argument("ema momentum must be in [0, 1]");
  auto q = state.query.parameters();
  auto k = state.key.parameters();
  if (q.size() != k.size()) throw std::invalid_argument("encoder parameter count mismatch");
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!q[i].tensor->same_shape(*k[i].tensor))
      throw std::invalid_argument("encoder parameter shape mismatch");
    for (std::size_t j = 0; j < q[i].tensor->size(); ++j)
      (*k[i].tensor)[j] = momentum * (*k[i].tensor)[j] + (1.0 - momentum) * (*q[i].tensor)[j];
  }
}

LossReport train_step(const Batch& batch, EncoderState& state, opt::LarsOptimizer& optimizer,
                      double lr, const TrainStepOptions& opt) {
  if (!batch.views_q.same_shape(batch.views_k))
    throw std::invalid_argument("query/key view batches must be equal-shaped");

  const EmbedResult keys = embed(state.key, batch.views_k);
  std::vector<Tensor> grads = state.query.zero_grads();
  LossReport report =
      contrastive_backward(state.query, batch.views_q, keys.embeddings, opt.loss, grads);

  if (opt.symmetrize_loss) {
    const EmbedResult keys_rev = embed(state.key, batch.views_q);
    const LossReport rev =
        contrastive_backward(state.query, batch.views_k, keys_rev.embeddings, opt.loss, grads);
    for (Tensor& g : grads)
      for (double& x : g.v) x *= 0.5;
    report.loss = 0.5 * (report.loss + rev.loss);
    report.positive_similarity_mean =
        0.5 * (report.positive_similarity_mean + rev.positive_similarity_mean);
    report.negative_similarity_mean =
        0.5 * (report.negative_similarity_mean + rev.negative_similarity_mean);
  }

  auto params = state.query.parameters();
  optimizer.step(params, grads, lr);
  ema_update(state, opt.ema_momentum);
  return report;
}

namespace {

// Per-video sorted frame indices for gap-aware neighbor lookup.
struct VideoIndex {
  std::vector<std::uint32_t> frame_indices;  // sorted
  std::vector<std::size_t> record_slots;     // parallel, into the records vector
};

std::size_t sample_neighbor_slot(const VideoIndex& vi, std::size_t pos_in_video,
                                 int max_offset, Rng& rng) {
  const std::uint32_t anchor_index = vi.frame_indices[pos_in_video];
  const auto lo = std::lower_bound(
      vi.frame_indices.begin(), vi.frame_indices.end(),
      anchor_index > static_cast<std::uint32_t>(max_offset) ? anchor_index - max_offset : 0);
  const auto hi = std::upper_bound(vi.frame_indices.begin(), vi.frame_indices.end(),
                                   anchor_index + static_cast<std::uint32_t>(max_offset));
  const std::size_t count = static_cast<std::size_t>(hi - lo) - 1;  // minus the anchor
  if (count == 0) return vi.record_slots[pos_in_video];
  std::size_t pick = static_cast<std::size_t>(lo - vi.frame_indices.begin()) +
                     static_cast<std::size_t>(rng.next_below(count));
  if (pick >= pos_in_video) pick++;
  return vi.record_slots[pick];
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TrainResult run_training(const std::vector<ingest::FrameRecord>& records,
                         const TrainLoopConfig& cfg) {
  if (records.empty()) throw std::invalid_argument("no training records");
  if (cfg.batch_size < 1 || cfg.epochs < 1)
    throw std::invalid_argument("batch size and epochs must be positive");
  if (static_cast<std::size_t>(cfg.batch_size) > records.size())
    throw std::invalid_argument("batch size exceeds the record count");

  // Group records by video with sorted frame indices.
  std::map<std::uint64_t, VideoIndex> by_video;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& vi = by_video[records[i].video_id];
    vi.frame_indices.push_back(records[i].frame_index);
    vi.record_slots.push_back(i);
  }
  for (auto& [id, vi] : by_video) {
    std::vector<std::size_t> order(vi.frame_indices.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return vi.frame_indices[a] < vi.frame_indices[b];
    });
    VideoIndex sorted;
    for (std::size_t i : order) {
      sorted.frame_indices.push_back(vi.frame_indices[i]);
      sorted.record_slots.push_back(vi.record_slots[i]);
    }
    vi = std::move(sorted);
  }
  // Where each record sits inside its video's sorted order.
  std::vector<std::size_t> pos_in_video(records.size());
  for (const auto& [id, vi] : by_video)
    for (std::size_t p = 0; p < vi.record_slots.size(); ++p)
      pos_in_video[vi.record_slots[p]] = p;

  const std::size_t steps_per_epoch = records.size() / cfg.batch_size;
  if (steps_per_epoch == 0) throw std::invalid_argument("not enough records for one batch");
  opt::OptimConfig optim = cfg.optim;
  optim.total_steps = static_cast<std::int64_t>(steps_per_epoch) * cfg.epochs;
  optim.batch_size = cfg.batch_size;
  const opt::ScheduleState sched = opt::ScheduleState::from_config(optim);

  TrainResult result;
  Rng init_rng(cfg.seed);
  result.state = make_encoder_state(cfg.encoder, init_rng);
  opt::LarsOptimizer optimizer(optim);

  const int max_offset = cfg.window.max_offset_frames();
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the deterministic rng; re-pairs every epoch.
    Rng shuffle_rng = Rng::derive(cfg.seed, 0x5f5f0000ULL + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      const std::uint64_t batch_seed = mix_seed(cfg.seed, 0xb000000ULL + step);
      Rng batch_rng(batch_seed);
      result.replay_log.push_back({step, batch_seed});

      std::vector<const ImageU8*> views_q, views_k;
      std::vector<ImageU8> storage;
      storage.reserve(2 * cfg.batch_size);
      for (int s = 0; s < cfg.batch_size; ++s) {
        const std::size_t anchor_slot = order[b * cfg.batch_size + s];
        const ingest::FrameRecord& anchor = records[anchor_slot];
        const VideoIndex& vi = by_video[anchor.video_id];
        const std::size_t neighbor_slot =
            sample_neighbor_slot(vi, pos_in_video[anchor_slot], max_offset, batch_rng);
        result.pairs_total++;
        if (neighbor_slot == anchor_slot) result.pairs_self++;

        const aug::TrainingViews views = aug::make_training_pair(
            anchor, records[neighbor_slot], cfg.policy, batch_rng);
        storage.push_back(views.view_q);
        storage.push_back(views.view_k);
      }
      for (std::size_t s = 0; s < storage.size(); s += 2) views_q.push_back(&storage[s]);
      for (std::size_t s = 1; s < storage.size(); s += 2) views_k.push_back(&storage[s]);

      Batch batch;
      batch.views_q = to_input_tensor(views_q);
      batch.views_k = to_input_tensor(views_k);

      const double lr = opt::lr_at(step, sched);
      const LossReport report = train_step(batch, result.state, optimizer, lr, cfg.step);
      result.curve.push_back(
          {step, report.loss, report.positive_similarity_mean,
           report.negative_similarity_mean, lr});
      step++;
    }
  }
  return result;
}

void write_loss_csv(const std::vector<LossCurveRow>& curve, std::ostream& out) {
  out << "step,loss,pos_sim,neg_sim,lr\n";
  out.precision(12);
  for (const auto& row : curve)
    out << row.step << "," << row.loss << "," << row.pos_sim << "," << row.neg_sim << ","
        << row.lr << "\n";
}

void write_replay_log(const std::vector<ReplayLogRow>& log, std::ostream& out) {
  for (const auto& row : log) out << row.batch_index << "\t" << row.seed << "\n";
}

}  // namespace fvss::nn
