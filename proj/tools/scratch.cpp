// Temporary tuning driver for the directional experiments; not shipped.
#include <chrono>
#include <cstdio>
#include <filesystem>

#include "fvss/sweep.hpp"
#include "fvss/synth.hpp"

using namespace fvss;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;
  const double arg_lr = argc > 2 ? std::stod(argv[2]) : 1.6;
  const double arg_trust = argc > 3 ? std::stod(argv[3]) : 0.02;
  const int arg_epochs = argc > 4 ? std::stoi(argv[4]) : 12;
  const double arg_mom = argc > 5 ? std::stod(argv[5]) : 0.9;
  const int arg_feat = argc > 6 ? std::stoi(argv[6]) : 32;      // gap channels
  const double arg_blur = argc > 7 ? std::stod(argv[7]) : 0.7;  // blur sigma max
  const int arg_arms = argc > 8 ? std::stoi(argv[8]) : 0xf;     // bitmask
  const fs::path root = fs::temp_directory_path() / ("fvss_scratch_" + std::to_string(seed));
  fs::remove_all(root);

  synth::SceneSpec scene;
  scene.seed = seed;
  scene.eval_poses = 8;
  scene.saccade_rate = 0.03;
  scene.videos = 36;
  scene.frames_per_video = 100;
  const synth::SynthPaths paths = synth::generate_scenes(scene, root / "data");
  std::printf("synth done\n");

  eval::PipelineConfig base;
  base.videos_dir = paths.videos;
  base.resolution = scene.frame_size;
  base.crop_n = 48;
  base.delta_t_seconds = 2.0;
  base.encoder.input_side = 32;
  base.encoder.backbone = "conv:8:3:2:1,relu,conv:16:3:2:1,relu,conv:" +
                          std::to_string(arg_feat) + ":3:2:1,relu,gap";
  base.encoder.projection_hidden = 64;
  base.encoder.projection_dim = 16;
  base.optim.base_lr = arg_lr;
  base.optim.trust_coefficient = arg_trust;
  base.optim.momentum = arg_mom;
  base.policy = aug::PairAugmentPolicy::mocov3(32);
  base.policy.query.jitter_hue = 0.05;
  base.policy.key.jitter_hue = 0.05;
  base.policy.query.grayscale_probability = 0.0;
  base.policy.key.grayscale_probability = 0.0;
  base.policy.query.blur_sigma_max = arg_blur;
  base.policy.key.blur_sigma_max = arg_blur;
  base.epochs = arg_epochs;
  base.batch_size = 64;
  base.seed = seed;

  eval::DatasetSpec instance_spec;
  instance_spec.name = "synthetic_instance";
  instance_spec.group = eval::SemanticGroup::Instance;
  instance_spec.split_rule = eval::SplitRule::BackgroundDisjoint;
  instance_spec.center_crop_at_eval = false;
  base.datasets = {{instance_spec, paths.eval_instance}};

  auto run = [&](const char* tag, auto mutate) {
    eval::PipelineConfig cfg = base;
    cfg.work_dir = root / tag;
    mutate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const eval::PipelineResult result = eval::run_pipeline(cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-12s records=%llu loss %.3f -> %.3f  instance top1 = %6.2f  (%.1fs)\n", tag,
                (unsigned long long)result.manifest.total_records(),
                result.training.curve.front().loss, result.training.curve.back().loss,
                result.reports[0].top1, secs);
    return result;
  };

  if (arg_arms & 1) run("gaze48", [](eval::PipelineConfig&) {});
  if (arg_arms & 2) run("full96", [](eval::PipelineConfig& c) { c.crop_n = c.resolution; });
  if (arg_arms & 4)
    run("center48", [](eval::PipelineConfig& c) { c.crop_mode = ingest::CropMode::Center; });
  if (arg_arms & 8)
    run("gaze48_dt0", [](eval::PipelineConfig& c) { c.delta_t_seconds = 0.0; });
  return 0;
}
