#include "fvss/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fvss/errors.hpp"
#include "fvss/rng.hpp"

namespace fvss::synth {

namespace {

std::uint32_t hash32(std::uint32_t x) {
  x ^= x >> 16;
  x *= 0x7feb352dU;
  x ^= x >> 15;
  x *= 0x846ca68bU;
  x ^= x >> 16;
  return x;
}

std::uint32_t hash_coords(std::uint32_t salt, std::int64_t x, std::int64_t y) {
  return hash32(salt ^ hash32(static_cast<std::uint32_t>(x * 2654435761U) ^
                              hash32(static_cast<std::uint32_t>(y * 40503U))));
}

struct Rgb {
  double r, g, b;
};

Rgb hsv(double h, double s, double v) {
  h -= std::floor(h);
  const double k = h * 6.0;
  const int sector = static_cast<int>(k) % 6;
  const double f = k - std::floor(k);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

// Procedural background families keyed by background id; textures are
// functions over the (camera-shifted) world plane so head motion slides them.
Rgb background_pixel(const SceneSpec& spec, int bg_id, std::int64_t wx, std::int64_t wy) {
  const std::uint32_t salt = hash32(static_cast<std::uint32_t>(spec.seed) ^
                                    hash32(0x6261u + static_cast<std::uint32_t>(bg_id)));
  const int family = static_cast<int>(salt % 5);
  const int period = 8 + static_cast<int>((salt >> 8) % 9);  // 8..16
  const double hue = ((salt >> 16) % 360) / 360.0;
  const Rgb c0 = hsv(hue, 0.35, 0.55);
  const Rgb c1 = hsv(hue + 0.13, 0.45, 0.8);

  auto mod = [](std::int64_t a, int m) { return static_cast<int>(((a % m) + m) % m); };
  double t = 0.0;
  switch (family) {
    case 0:  // diagonal stripes
      t = mod(wx + wy, 2 * period) < period ? 0.0 : 1.0;
      break;
    case 1:  // checker
      t = (mod(wx, 2 * period) < period) == (mod(wy, 2 * period) < period) ? 0.0 : 1.0;
      break;
    case 2: {  // bilinear value noise on a lattice
      const std::int64_t gx = wx >= 0 ? wx / period : (wx - period + 1) / period;
      const std::int64_t gy = wy >= 0 ? wy / period : (wy - period + 1) / period;
      const double fx = static_cast<double>(wx - gx * period) / period;
      const double fy = static_cast<double>(wy - gy * period) / period;
      auto corner = [&](std::int64_t cx, std::int64_t cy) {
        return (hash_coords(salt, cx, cy) & 0xffff) / 65535.0;
      };
      const double top = (1 - fx) * corner(gx, gy) + fx * corner(gx + 1, gy);
      const double bot = (1 - fx) * corner(gx, gy + 1) + fx * corner(gx + 1, gy + 1);
      t = (1 - fy) * top + fy * bot;
      break;
    }
    case 3:  // vertical stripes
      t = mod(wx, 2 * period) < period ? 0.0 : 1.0;
      break;
    default: {  // dot grid
      const int dx = mod(wx, period) - period / 2;
      const int dy = mod(wy, period) - period / 2;
      t = dx * dx + dy * dy <= (period * period) / 9 ? 1.0 : 0.0;
      break;
    }
  }
  return {c0.r + t * (c1.r - c0.r), c0.g + t * (c1.g - c0.g), c0.b + t * (c1.b - c0.b)};
}

bool inside_shape(int class_id, double u, double v) {
  switch (class_id % 6) {
    case 0: return u * u + v * v <= 1.0;                               // disk
    case 1: return std::max(std::abs(u), std::abs(v)) <= 0.9;          // square
    case 2: return v >= -0.9 && v <= 0.9 && std::abs(u) <= (0.9 - v) * 0.6;  // triangle
    case 3: {                                                          // ring
      const double r = u * u + v * v;
      return r >= 0.45 * 0.45 && r <= 1.0;
    }
    case 4:  // cross
      return std::abs(u) <= 1.0 && std::abs(v) <= 1.0 &&
             (std::abs(u) <= 0.34 || std::abs(v) <= 0.34);
    default: return std::abs(u) + std::abs(v) <= 1.0;                  // diamond
  }
}

Rgb instance_pixel(const SceneSpec& spec, int instance_id, double u, double v) {
  const double hue =
      instance_id * 0.6180339887498949 + 0.05 * static_cast<double>(spec.seed % 7);
  const Rgb a = hsv(hue, 0.9, 0.95);
  const Rgb b = hsv(hue + 0.31, 0.85, 0.6);
  // Two-tone pattern in the object frame; patterns rotate with the object,
  // so instance identity is not a bare color histogram.
  bool first = false;
  switch (instance_id % 4) {
    case 0: first = u + v < 0.0; break;                                  // half split
    case 1: first = u * u + v * v < 0.45; break;                         // core vs rim
    case 2: first = u * v > 0.0; break;                                  // quadrants
    default: first = std::fmod(std::abs(u * 2.5 + 10.0), 1.0) < 0.5;     // bars
  }
  return first ? a : b;
}

constexpr double kPi = 3.14159265358979323846;

int class_of_instance(const SceneSpec& spec, int instance_id) {
  return instance_id / spec.instances_per_class;
}

void write_dataset_index(const std::filesystem::path& dir,
                         const std::vector<std::string>& rows) {
  std::ofstream out(dir / "index.tsv");
  if (!out) throw UserError("cannot write dataset index in " + dir.string());
  for (const std::string& row : rows) out << row << "\n";
}

std::string index_row(const std::string& path, int label, int background, const char* split) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s\t%d\t%d\t%s", path.c_str(), label, background, split);
  return buf;
}

}  // namespace

FrameRender render_frame(const SceneSpec& spec, int instance_id, int background_id,
                         const ObjectPose& pose, int camera_dx, int camera_dy, int image_size,
                         double object_diameter) {
  FrameRender render;
  render.frame = ImageU8(image_size, image_size);
  render.mask = MaskU8(image_size, image_size);

  const int class_id = class_of_instance(spec, instance_id);
  const double half = 0.5 * object_diameter * pose.scale;
  const double cos_a = std::cos(-pose.angle), sin_a = std::sin(-pose.angle);

  double sum_x = 0.0, sum_y = 0.0;
  std::uint64_t count = 0;
  for (int y = 0; y < image_size; ++y)
    for (int x = 0; x < image_size; ++x) {
      const double rx = x - pose.cx, ry = y - pose.cy;
      const double u = (cos_a * rx - sin_a * ry) / half;
      const double v = (sin_a * rx + cos_a * ry) / half;
      Rgb color;
      if (instance_id >= 0 && std::abs(u) <= 1.2 && std::abs(v) <= 1.2 &&
          inside_shape(class_id, u, v)) {
        color = instance_pixel(spec, instance_id, u, v);
        render.mask.at(x, y) = 255;
        sum_x += x;
        sum_y += y;
        count++;
      } else {
        color = background_pixel(spec, background_id, x + camera_dx, y + camera_dy);
      }
      render.frame.at(x, y, 0) =
          static_cast<std::uint8_t>(std::lround(std::clamp(color.r * 255.0, 0.0, 255.0)));
      render.frame.at(x, y, 1) =
          static_cast<std::uint8_t>(std::lround(std::clamp(color.g * 255.0, 0.0, 255.0)));
      render.frame.at(x, y, 2) =
          static_cast<std::uint8_t>(std::lround(std::clamp(color.b * 255.0, 0.0, 255.0)));
    }
  if (count > 0) {
    render.has_object = true;
    render.centroid_x = sum_x / static_cast<double>(count);
    render.centroid_y = sum_y / static_cast<double>(count);
  }
  return render;
}

SynthPaths synth_paths(const std::filesystem::path& out_dir) {
  SynthPaths p;
  p.videos = out_dir / "videos";
  p.eval_instance = out_dir / "eval" / "instance";
  p.eval_category = out_dir / "eval" / "category";
  p.eval_scene = out_dir / "eval" / "scene";
  p.variants_normal = out_dir / "eval" / "variants" / "normal";
  p.variants_missing_background = out_dir / "eval" / "variants" / "missing_background";
  p.variants_missing_object = {out_dir / "eval" / "variants" / "missing_object_black",
                               out_dir / "eval" / "variants" / "missing_object_fill"};
  return p;
}

namespace {

// Smooth bounded random walk used for trajectories and camera shake.
struct Walker {
  double pos, vel = 0.0, lo, hi, accel, max_speed;

  void step(Rng& rng) {
    vel = std::clamp(vel + rng.uniform(-accel, accel), -max_speed, max_speed);
    pos += vel;
    if (pos < lo) {
      pos = lo;
      vel = std::abs(vel);
    }
    if (pos > hi) {
      pos = hi;
      vel = -std::abs(vel);
    }
  }
};

void generate_video(const SceneSpec& spec, const std::filesystem::path& dir, int video_id,
                    int instance_id, int background_id) {
  std::filesystem::create_directories(dir / "frames");
  std::filesystem::create_directories(dir / "masks");

  Rng rng = Rng::derive(spec.seed, 0x71d0ULL + static_cast<std::uint64_t>(video_id));
  const double half = spec.object_size / 2.0;
  const double margin = half * 1.3;
  Walker wx{rng.uniform(margin, spec.frame_size - margin), 0.0, margin,
            spec.frame_size - margin, 0.6, 2.5};
  Walker wy{rng.uniform(margin, spec.frame_size - margin), 0.0, margin,
            spec.frame_size - margin, 0.6, 2.5};
  Walker wangle{rng.uniform(0.0, 2 * kPi), 0.0, -1e9, 1e9, 0.05, 0.2};
  Walker wscale{1.0, 0.0, 0.85, 1.15, 0.01, 0.03};
  Walker camx{0.0, 0.0, -1e9, 1e9, 0.8, 3.0};
  Walker camy{0.0, 0.0, -1e9, 1e9, 0.8, 3.0};

  std::ofstream meta(dir / "meta.tsv");
  if (!meta) throw UserError("cannot write video meta in " + dir.string());

  for (int f = 0; f < spec.frames_per_video; ++f) {
    wx.step(rng);
    wy.step(rng);
    wangle.step(rng);
    wscale.step(rng);
    camx.step(rng);
    camy.step(rng);

    ObjectPose pose{wx.pos, wy.pos, wangle.pos, wscale.pos};
    const FrameRender render =
        render_frame(spec, instance_id, background_id, pose,
                     static_cast<int>(std::lround(camx.pos)),
                     static_cast<int>(std::lround(camy.pos)), spec.frame_size,
                     spec.object_size);

    int gx, gy;
    if (spec.saccade_rate > 0.0 && rng.bernoulli(spec.saccade_rate)) {
      gx = static_cast<int>(rng.next_below(spec.frame_size));
      gy = static_cast<int>(rng.next_below(spec.frame_size));
    } else {
      gx = static_cast<int>(std::lround(render.centroid_x)) +
           static_cast<int>(rng.uniform_int(-spec.gaze_jitter, spec.gaze_jitter));
      gy = static_cast<int>(std::lround(render.centroid_y)) +
           static_cast<int>(rng.uniform_int(-spec.gaze_jitter, spec.gaze_jitter));
      gx = std::clamp(gx, 0, spec.frame_size - 1);
      gy = std::clamp(gy, 0, spec.frame_size - 1);
    }

    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.ppm", f);
    write_ppm(render.frame, dir / "frames" / name);
    std::snprintf(name, sizeof(name), "mask_%06d.pgm", f);
    write_pgm(render.mask, dir / "masks" / name);
    meta << f << "\t" << f * 200 << "\t" << gx << "\t" << gy << "\n";
  }

  std::ofstream labels(dir / "video.tsv");
  labels << instance_id << "\t" << class_of_instance(spec, instance_id) << "\t"
         << background_id << "\n";
}

ObjectPose eval_pose(const SceneSpec& spec, int pose_index, int image_size) {
  ObjectPose pose;
  pose.cx = image_size / 2.0;
  pose.cy = image_size / 2.0;
  pose.angle = pose_index * (2.0 * kPi / std::max(1, spec.eval_poses)) + 0.37;
  pose.scale = 0.85 + 0.12 * (pose_index % 4);
  return pose;
}

}  // namespace

SynthPaths generate_scenes(const SceneSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.object_classes < 1 || spec.instances_per_class < 1 || spec.backgrounds < 1 ||
      spec.videos < 1 || spec.frame_size < 16)
    throw UserError("invalid synthetic scene spec");
  const SynthPaths paths = synth_paths(out_dir);

  // Training videos: instances cycle through videos; the background pairing
  // ensures each instance is seen on at least two backgrounds.
  for (int v = 0; v < spec.videos; ++v) {
    const int instance = v % spec.instances();
    const int round = v / spec.instances();
    const int background = (instance * 2 + round * 5) % spec.backgrounds;
    char name[32];
    std::snprintf(name, sizeof(name), "video_%03d", v);
    generate_video(spec, paths.videos / name, v, instance, background);
  }

  // Object-centered eval renders: one image per instance x background x pose.
  const int eval_size = spec.eval_image_size;
  const double eval_diameter = spec.eval_object_fraction * eval_size;
  std::vector<std::string> instance_rows, category_rows;
  std::vector<std::string> variant_rows;  // shared across the four variant sets
  std::filesystem::create_directories(paths.eval_instance / "images");
  std::filesystem::create_directories(paths.eval_category / "images");
  for (const auto& dir : {paths.variants_normal, paths.variants_missing_background,
                          paths.variants_missing_object[0], paths.variants_missing_object[1]})
    std::filesystem::create_directories(dir / "images");

  for (int instance = 0; instance < spec.instances(); ++instance)
    for (int bg = 0; bg < spec.backgrounds; ++bg)
      for (int pose_i = 0; pose_i < spec.eval_poses; ++pose_i) {
        Rng rng = Rng::derive(spec.seed, 0xe7a1ULL + ((instance * 64 + bg) * 64 + pose_i));
        const ObjectPose pose = eval_pose(spec, pose_i, eval_size);
        const int cam_dx = static_cast<int>(rng.next_below(64));
        const int cam_dy = static_cast<int>(rng.next_below(64));
        const FrameRender render = render_frame(spec, instance, bg, pose, cam_dx, cam_dy,
                                                eval_size, eval_diameter);
        char name[64];
        std::snprintf(name, sizeof(name), "i%02d_b%02d_p%d.ppm", instance, bg, pose_i);
        const std::string rel = std::string("images/") + name;
        const int class_id = class_of_instance(spec, instance);
        const char* split = pose_i % 2 == 0 ? "train" : "test";

        write_ppm(render.frame, paths.eval_instance / rel);
        instance_rows.push_back(index_row(rel, instance, bg, "-"));
        write_ppm(render.frame, paths.eval_category / rel);
        category_rows.push_back(index_row(rel, class_id, bg, split));

        // variants share geometry, labels, and split
        write_ppm(render.frame, paths.variants_normal / rel);
        ImageU8 missing_bg = render.frame;
        for (int y = 0; y < eval_size; ++y)
          for (int x = 0; x < eval_size; ++x)
            if (render.mask.at(x, y) == 0)
              for (int c = 0; c < 3; ++c) missing_bg.at(x, y, c) = 0;
        write_ppm(missing_bg, paths.variants_missing_background / rel);

        ImageU8 obj_black = render.frame;
        for (int y = 0; y < eval_size; ++y)
          for (int x = 0; x < eval_size; ++x)
            if (render.mask.at(x, y) != 0)
              for (int c = 0; c < 3; ++c) obj_black.at(x, y, c) = 0;
        write_ppm(obj_black, paths.variants_missing_object[0] / rel);

        const FrameRender bg_only = render_frame(spec, /*instance_id=*/-1, bg, pose, cam_dx,
                                                 cam_dy, eval_size, eval_diameter);
        write_ppm(bg_only.frame, paths.variants_missing_object[1] / rel);
        variant_rows.push_back(index_row(rel, class_id, bg, split));
      }
  write_dataset_index(paths.eval_instance, instance_rows);
  write_dataset_index(paths.eval_category, category_rows);
  for (const auto& dir : {paths.variants_normal, paths.variants_missing_background,
                          paths.variants_missing_object[0], paths.variants_missing_object[1]})
    write_dataset_index(dir, variant_rows);

  // Scene recognition: background-only shots at random camera offsets.
  std::vector<std::string> scene_rows;
  std::filesystem::create_directories(paths.eval_scene / "images");
  for (int bg = 0; bg < spec.backgrounds; ++bg)
    for (int shot = 0; shot < spec.scene_shots_per_background; ++shot) {
      Rng rng = Rng::derive(spec.seed, 0x5ce2ULL + (bg * 1024 + shot));
      const int cam_dx = static_cast<int>(rng.next_below(512));
      const int cam_dy = static_cast<int>(rng.next_below(512));
      const FrameRender render =
          render_frame(spec, -1, bg, eval_pose(spec, 0, eval_size), cam_dx, cam_dy, eval_size,
                       eval_diameter);
      char name[64];
      std::snprintf(name, sizeof(name), "b%02d_s%02d.ppm", bg, shot);
      const std::string rel = std::string("images/") + name;
      write_ppm(render.frame, paths.eval_scene / rel);
      scene_rows.push_back(index_row(rel, bg, bg, shot % 2 == 0 ? "train" : "test"));
    }
  write_dataset_index(paths.eval_scene, scene_rows);

  return paths;
}

}  // namespace fvss::synth
