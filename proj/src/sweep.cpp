#include "fvss/sweep.hpp"

#include <cstdio>
#include <map>

#include "fvss/errors.hpp"

namespace fvss::eval {

ProbeReport probe_dataset(const nn::Network& frozen, const DatasetSpec& spec,
                          const LabeledDataset& dataset, int input_side,
                          const ProbeConfig& probe_config, std::uint64_t seed) {
  const auto [train_idx, test_idx] = apply_split_rules(spec, dataset);
  if (train_idx.empty() || test_idx.empty())
    throw UserError(spec.name + ": empty train or test split");

  FeatureExtractOptions train_opt;
  train_opt.input_side = input_side;
  train_opt.train_augment = true;
  train_opt.seed = seed;

  FeatureExtractOptions eval_opt;
  eval_opt.input_side = input_side;
  eval_opt.center_crop = spec.center_crop_at_eval;

  const FeatureMatrix train_features = extract_features(frozen, dataset, train_idx, train_opt);
  const FeatureMatrix test_features = extract_features(frozen, dataset, test_idx, eval_opt);
  ProbeConfig cfg = probe_config;
  cfg.seed = seed;
  const LinearProbe probe = LinearProbe::train(train_features, cfg);

  ProbeReport report;
  report.dataset = spec.name;
  report.group = spec.group;
  report.top1 = probe.top1_accuracy(test_features);
  if (probe.num_classes() >= 5) {
    report.top5 = probe.topk_accuracy(test_features, 5);
    report.has_top5 = true;
  }
  report.n_train = train_features.labels.size();
  report.n_test = test_features.labels.size();
  report.probe_epochs = cfg.epochs;
  report.feature_dim = frozen.feature_dim();
  return report;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;
  std::filesystem::create_directories(config.work_dir);

  const auto videos = ingest::scan_video_root(config.videos_dir);
  ingest::IngestOptions ingest_opt;
  ingest_opt.spec = {config.crop_n, config.resolution};
  ingest_opt.crop_mode = config.crop_mode;
  const auto shards_dir = config.work_dir / "shards";
  if (config.predict_gaze) {
    ingest::StubSaliencyPredictor source(config.stub);
    result.manifest = ingest::build_shards(videos, source, ingest_opt, shards_dir);
  } else {
    ingest::GroundTruthGaze source;
    result.manifest = ingest::build_shards(videos, source, ingest_opt, shards_dir);
  }

  const auto records = ingest::read_all_records(result.manifest, shards_dir);

  nn::TrainLoopConfig train_cfg;
  train_cfg.encoder = config.encoder;
  train_cfg.policy = config.policy;
  train_cfg.window = {config.delta_t_seconds, ingest::kFramesPerSecond};
  train_cfg.optim = config.optim;
  train_cfg.step = config.step;
  train_cfg.epochs = config.epochs;
  train_cfg.batch_size = config.batch_size;
  train_cfg.seed = config.seed;
  result.training = nn::run_training(records, train_cfg);

  for (const auto& [spec, dir] : config.datasets) {
    const LabeledDataset dataset = load_dataset(dir);
    result.reports.push_back(probe_dataset(result.training.state.query, spec, dataset,
                                           config.encoder.input_side, config.probe,
                                           config.seed));
  }
  if (!result.reports.empty()) result.summaries = summarize_groups(result.reports);
  return result;
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::CropSize: return "crop_size";
    case SweepAxis::TemporalWindow: return "delta_t";
    case SweepAxis::GazeMode: return "gaze_mode";
  }
  return "unknown";
}

namespace {

PipelineConfig apply_axis_value(PipelineConfig config, SweepAxis axis,
                                const std::string& value) {
  switch (axis) {
    case SweepAxis::CropSize:
      config.crop_n = std::stoi(value);
      break;
    case SweepAxis::TemporalWindow:
      config.delta_t_seconds = std::stod(value);
      break;
    case SweepAxis::GazeMode:
      if (value == "gaze")
        config.crop_mode = ingest::CropMode::Gaze;
      else if (value == "center")
        config.crop_mode = ingest::CropMode::Center;
      else
        throw UserError("gaze_mode must be `gaze` or `center`, got " + value);
      break;
  }
  return config;
}

}  // namespace

std::vector<SweepRow> run_sweep(const PipelineConfig& base, SweepAxis axis,
                                std::span<const std::string> values) {
  if (values.empty()) throw UserError("sweep needs at least one value");
  const std::string axis_name = sweep_axis_name(axis);

  std::vector<SweepRow> rows;
  std::map<SemanticGroup, double> baseline;
  bool have_baseline = false;

  for (const std::string& value : values) {
    PipelineConfig cell = apply_axis_value(base, axis, value);
    cell.work_dir = base.work_dir / ("cell_" + axis_name + "_" + value);
    try {
      const PipelineResult result = run_pipeline(cell);
      for (const GroupSummary& s : result.summaries) {
        if (!have_baseline) baseline[s.group] = s.average;
        SweepRow row;
        row.axis = axis_name;
        row.value = value;
        row.group = s.group;
        row.accuracy = s.average;
        const auto it = baseline.find(s.group);
        row.improvement = it == baseline.end() ? 0.0 : s.average - it->second;
        rows.push_back(row);
      }
      have_baseline = true;
    } catch (const std::exception&) {
      SweepRow row;
      row.axis = axis_name;
      row.value = value;
      row.failed = true;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << "axis,value,group,improvement\n";
  char buf[32];
  for (const auto& row : rows) {
    if (row.failed) {
      out << row.axis << "," << row.value << ",failed,\n";
      continue;
    }
    std::snprintf(buf, sizeof(buf), "%.3f", row.improvement);
    out << row.axis << "," << row.value << "," << group_name(row.group) << "," << buf << "\n";
  }
}

}  // namespace fvss::eval
