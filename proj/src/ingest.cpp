#include "fvss/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fvss/errors.hpp"

namespace fvss::ingest {

namespace {

std::vector<VideoFrameEntry> parse_meta(const std::filesystem::path& meta_path,
                                        const std::filesystem::path& video_dir) {
  std::ifstream in(meta_path);
  if (!in) throw UserError("cannot open " + meta_path.string());
  std::vector<VideoFrameEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    long long frame_index = 0, timestamp = 0, gx = 0, gy = 0;
    if (!(row >> frame_index >> timestamp >> gx >> gy))
      throw UserError("malformed meta row in " + meta_path.string() + ": " + line);
    VideoFrameEntry e;
    e.frame_index = static_cast<std::uint32_t>(frame_index);
    e.timestamp_ms = static_cast<std::uint32_t>(timestamp);
    if (gx >= 0 && gy >= 0) e.gaze = geom::GazePoint{static_cast<int>(gx), static_cast<int>(gy)};
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06u.ppm", e.frame_index);
    e.frame_path = video_dir / "frames" / name;
    entries.push_back(e);
  }
  std::sort(entries.begin(), entries.end(),
            [](const VideoFrameEntry& a, const VideoFrameEntry& b) {
              return a.frame_index < b.frame_index;
            });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].frame_index == entries[i - 1].frame_index)
      throw UserError("duplicate frame index in " + meta_path.string());
  return entries;
}

}  // namespace

std::vector<VideoDir> scan_video_root(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw UserError("video root is not a directory: " + root.string());
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "meta.tsv"))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) return {};

  std::vector<VideoDir> videos;
  videos.reserve(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    VideoDir v;
    v.video_id = i;
    v.dir = dirs[i];
    v.entries = parse_meta(dirs[i] / "meta.tsv", dirs[i]);
    videos.push_back(std::move(v));
  }
  return videos;
}

Manifest build_shards(const std::vector<VideoDir>& videos, const GazeSource& gaze_source,
                      const IngestOptions& options, const std::filesystem::path& out_dir,
                      IngestStats* stats_out) {
  if (!options.spec.valid()) throw std::invalid_argument("invalid crop spec");
  std::filesystem::create_directories(out_dir);

  IngestStats stats;
  ShardWriter writer(out_dir, options.max_records_per_shard);
  const bool ground_truth = gaze_source.mode() == GazeSource::Mode::GroundTruth;
  const int center = options.spec.resolution / 2;

  auto flush_manifest = [&](bool partial) {
    Manifest m;
    m.entries = writer.finalize();
    m.skipped = stats.clips_skipped;
    m.partial = partial;
    write_manifest(m, out_dir / kManifestFileName);
    return m;
  };

  try {
    for (const VideoDir& video : videos) {
      // Decode into runs of contiguous frame indices; a failed decode breaks
      // the run the same way a gap in the extraction would.
      std::vector<FrameRecord> run;
      auto consume_run = [&](std::vector<FrameRecord>&& frames) {
        std::size_t offset = 0;
        while (frames.size() - offset >= kClipFrames) {
          Clip clip;
          clip.frames.assign(frames.begin() + offset, frames.begin() + offset + kClipFrames);
          offset += kClipFrames;

          std::array<SequenceOf8, 3> seqs;
          try {
            seqs = segment_clip(clip);
          } catch (const std::invalid_argument&) {
            stats.clips_skipped++;
            continue;
          }
          try {
            // Resolve all three sequences before writing anything so a
            // missing gaze skips the clip atomically.
            std::array<std::array<geom::GazePoint, kSequenceFrames>, 3> gaze_sets;
            for (std::size_t s = 0; s < 3; ++s)
              gaze_sets[s] = resolve_gaze(clip, seqs[s], gaze_source);
            for (std::size_t s = 0; s < 3; ++s) {
              const SequenceOf8& seq = seqs[s];
              const auto& gazes = gaze_sets[s];
              for (std::size_t i = 0; i < kSequenceFrames; ++i) {
                FrameRecord rec = clip.frames[seq.indices[i]];
                const geom::GazePoint raw =
                    options.crop_mode == CropMode::Center ? geom::GazePoint{center, center}
                                                          : gazes[i];
                const geom::CorrectedGaze cg = geom::correct_gaze(raw, options.spec);
                rec.gaze = {cg.x, cg.y};
                rec.has_gaze = true;
                rec.gaze_origin =
                    ground_truth ? GazeOrigin::GroundTruth : GazeOrigin::Predicted;
                rec.pixels = geom::crop_window(clip.frames[seq.indices[i]].pixels, cg,
                                               options.spec);
                writer.write(rec);
                stats.records_written++;
              }
            }
          } catch (const MissingGazeError&) {
            stats.clips_skipped++;
          }
        }
        if (frames.size() > offset) stats.clips_skipped++;  // short tail
        frames.clear();
      };

      for (const VideoFrameEntry& entry : video.entries) {
        ImageU8 frame;
        bool ok = true;
        try {
          frame = read_ppm(entry.frame_path);
          if (frame.width != options.spec.resolution || frame.height != options.spec.resolution)
            ok = false;
        } catch (const UserError&) {
          ok = false;
        }
        if (!ok) {
          stats.decode_failures++;
          if (!run.empty()) consume_run(std::move(run));
          continue;
        }
        if (!run.empty() && entry.frame_index != run.back().frame_index + 1)
          consume_run(std::move(run));
        FrameRecord rec;
        rec.video_id = video.video_id;
        rec.frame_index = entry.frame_index;
        rec.timestamp_ms = entry.timestamp_ms;
        if (entry.gaze) {
          rec.gaze = *entry.gaze;
          rec.has_gaze = true;
        }
        rec.pixels = std::move(frame);
        run.push_back(std::move(rec));
      }
      if (!run.empty()) consume_run(std::move(run));
    }
  } catch (...) {
    flush_manifest(true);
    throw;
  }

  const Manifest manifest = flush_manifest(false);
  if (stats_out) *stats_out = stats;
  return manifest;
}

}  // namespace fvss::ingest
