#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fvss/frames.hpp"
#include "fvss/gaze_geometry.hpp"
#include "fvss/gaze_source.hpp"
#include "fvss/shard.hpp"

namespace fvss::ingest {

// On-disk video layout (the one decode path):
//   <video_dir>/meta.tsv            frame_index \t timestamp_ms \t gaze_x \t gaze_y
//                                   (gaze -1 -1 when no ground truth is attached)
//   <video_dir>/frames/frame_%06u.ppm
// A video root holds one such directory per video; they are ingested in
// sorted name order with sequential video ids.
struct VideoFrameEntry {
  std::uint32_t frame_index = 0;
  std::uint32_t timestamp_ms = 0;
  std::optional<geom::GazePoint> gaze;
  std::filesystem::path frame_path;
};

struct VideoDir {
  std::uint64_t video_id = 0;
  std::filesystem::path dir;
  std::vector<VideoFrameEntry> entries;
};

std::vector<VideoDir> scan_video_root(const std::filesystem::path& root);

enum class CropMode { Gaze, Center };

struct IngestOptions {
  geom::CropSpec spec;
  CropMode crop_mode = CropMode::Gaze;  // Center ignores gaze and crops at R/2
  std::uint64_t max_records_per_shard = 4096;
};

struct IngestStats {
  std::uint64_t records_written = 0;
  std::uint64_t clips_skipped = 0;    // short clips and missing-gaze clips
  std::uint64_t decode_failures = 0;  // unreadable frames, skipped and counted
};

// Runs the whole preprocessing pipeline: frames -> 25-frame clips -> three
// 8-frame sequences -> gaze -> boundary correction -> n-by-n crop -> shards.
// Writes `manifest.tsv` into out_dir. On an I/O failure the partial manifest
// is written with its partial marker before the error propagates.
Manifest build_shards(const std::vector<VideoDir>& videos, const GazeSource& gaze_source,
                      const IngestOptions& options, const std::filesystem::path& out_dir,
                      IngestStats* stats = nullptr);

inline constexpr const char* kManifestFileName = "manifest.tsv";

}  // namespace fvss::ingest
