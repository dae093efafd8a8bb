#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fvss/image.hpp"

namespace fvss::synth {

// Desk-scale egocentric stand-in: per video, one textured object instance
// wanders over a shifting procedural background while the simulated gaze
// tracks its centroid with bounded jitter and occasional saccades.
struct SceneSpec {
  int object_classes = 6;
  int instances_per_class = 2;
  int backgrounds = 12;
  int videos = 24;
  int frames_per_video = 75;  // 3 clips of 25
  int frame_size = 96;
  int object_size = 28;      // nominal diameter in frame pixels
  int gaze_jitter = 3;       // uniform jitter radius around the mask centroid
  double saccade_rate = 0.05;
  int eval_poses = 4;        // renders per instance-background pair
  int eval_image_size = 64;
  double eval_object_fraction = 0.56;  // object diameter / eval image side
  int scene_shots_per_background = 24;
  std::uint64_t seed = 0;

  int instances() const { return object_classes * instances_per_class; }
};

// Output layout under out_dir:
//   videos/video_###/{frames/*.ppm, masks/*.pgm, meta.tsv, video.tsv}
//   eval/instance, eval/category, eval/scene        (index.tsv datasets)
//   eval/variants/{normal,missing_background,missing_object_black,
//                  missing_object_fill}
struct SynthPaths {
  std::filesystem::path videos;
  std::filesystem::path eval_instance;
  std::filesystem::path eval_category;
  std::filesystem::path eval_scene;
  std::filesystem::path variants_normal;
  std::filesystem::path variants_missing_background;
  std::vector<std::filesystem::path> variants_missing_object;
};

SynthPaths synth_paths(const std::filesystem::path& out_dir);

// Seed-deterministic: identical spec and seed give byte-identical outputs.
SynthPaths generate_scenes(const SceneSpec& spec, const std::filesystem::path& out_dir);

// Rendering entry points exposed for tests.
struct FrameRender {
  ImageU8 frame;
  MaskU8 mask;
  double centroid_x = 0.0;  // mask centroid; valid when any mask pixel is set
  double centroid_y = 0.0;
  bool has_object = false;
};

struct ObjectPose {
  double cx = 0.0;
  double cy = 0.0;
  double angle = 0.0;
  double scale = 1.0;
};

FrameRender render_frame(const SceneSpec& spec, int instance_id, int background_id,
                         const ObjectPose& pose, int camera_dx, int camera_dy, int image_size,
                         double object_diameter);

}  // namespace fvss::synth
