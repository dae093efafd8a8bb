#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fvss/ingest.hpp"
#include "fvss/report.hpp"
#include "fvss/trainer.hpp"

namespace fvss::eval {

// One full ingest -> train -> probe -> summarize run.
struct PipelineConfig {
  std::filesystem::path videos_dir;
  std::filesystem::path work_dir;  // shards and outputs land here

  int resolution = 96;
  int crop_n = 48;  // crop_n == resolution trains on the full visual field
  ingest::CropMode crop_mode = ingest::CropMode::Gaze;
  bool predict_gaze = false;  // saliency-stub predictor instead of ground truth
  ingest::StubSaliencyConfig stub;

  double delta_t_seconds = 2.0;
  nn::EncoderConfig encoder;
  opt::OptimConfig optim;
  aug::PairAugmentPolicy policy = aug::PairAugmentPolicy::mocov3(32);
  nn::TrainStepOptions step;
  int epochs = 1;
  int batch_size = 32;
  std::uint64_t seed = 0;

  ProbeConfig probe;
  std::vector<std::pair<DatasetSpec, std::filesystem::path>> datasets;
};

struct PipelineResult {
  ingest::Manifest manifest;
  nn::TrainResult training;
  std::vector<ProbeReport> reports;
  std::vector<GroupSummary> summaries;
};

// Split, extract frozen features (augmented train side, center-cropped eval
// side per the dataset spec), train the probe, and score it.
ProbeReport probe_dataset(const nn::Network& frozen, const DatasetSpec& spec,
                          const LabeledDataset& dataset, int input_side,
                          const ProbeConfig& probe_config, std::uint64_t seed);

PipelineResult run_pipeline(const PipelineConfig& config);

enum class SweepAxis { CropSize, TemporalWindow, GazeMode };

std::string sweep_axis_name(SweepAxis axis);

struct SweepRow {
  std::string axis;
  std::string value;
  SemanticGroup group = SemanticGroup::Instance;
  double accuracy = 0.0;
  double improvement = 0.0;  // vs the first (baseline) value
  bool failed = false;
};

// One pipeline run per value; the first value is the baseline (its
// improvement rows are identically zero). A failed cell is marked and the
// sweep continues.
std::vector<SweepRow> run_sweep(const PipelineConfig& base, SweepAxis axis,
                                std::span<const std::string> values);

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);

}  // namespace fvss::eval
