#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "fvss/ingest.hpp"
#include "fvss/rng.hpp"

using namespace fvss;
using namespace fvss::ingest;
namespace fs = std::filesystem;

namespace {

Clip make_clip(std::uint64_t video_id, std::uint32_t first_index, int count, int side = 8) {
  Clip clip;
  for (int i = 0; i < count; ++i) {
    FrameRecord rec;
    rec.video_id = video_id;
    rec.frame_index = first_index + i;
    rec.timestamp_ms = rec.frame_index * kFrameIntervalMs;
    rec.pixels = ImageU8(side, side);
    clip.frames.push_back(std::move(rec));
  }
  return clip;
}

FrameRecord random_record(Rng& rng, int side) {
  FrameRecord rec;
  rec.video_id = rng.next_u64();
  rec.frame_index = static_cast<std::uint32_t>(rng.next_below(1u << 30));
  rec.timestamp_ms = rec.frame_index * kFrameIntervalMs;
  rec.gaze = {static_cast<int>(rng.next_below(side)), static_cast<int>(rng.next_below(side))};
  rec.has_gaze = true;
  rec.gaze_origin = rng.bernoulli(0.5) ? GazeOrigin::Predicted : GazeOrigin::GroundTruth;
  rec.pixels = ImageU8(side, side);
  for (auto& b : rec.pixels.data) b = static_cast<std::uint8_t>(rng.next_below(256));
  return rec;
}

bool records_equal(const FrameRecord& a, const FrameRecord& b) {
  return a.video_id == b.video_id && a.frame_index == b.frame_index &&
         a.timestamp_ms == b.timestamp_ms && a.gaze.x == b.gaze.x && a.gaze.y == b.gaze.y &&
         a.gaze_origin == b.gaze_origin && a.pixels.width == b.pixels.width &&
         a.pixels.data == b.pixels.data;
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Minimal video directory: constant-color frames with optional gaze rows.
void write_video_dir(const fs::path& dir, int frame_count, int side, bool with_gaze,
                     int missing_gaze_at = -1) {
  fs::create_directories(dir / "frames");
  std::ofstream meta(dir / "meta.tsv");
  for (int i = 0; i < frame_count; ++i) {
    ImageU8 frame(side, side);
    for (std::size_t p = 0; p < frame.data.size(); ++p)
      frame.data[p] = static_cast<std::uint8_t>((i * 37 + p) & 0xff);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.ppm", i);
    write_ppm(frame, dir / "frames" / name);
    if (with_gaze && i != missing_gaze_at)
      meta << i << "\t" << i * 200 << "\t" << (i % side) << "\t" << ((i * 3) % side) << "\n";
    else
      meta << i << "\t" << i * 200 << "\t-1\t-1\n";
  }
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("segment_clip partitions 24 of 25 frames into contiguous blocks") {
  const Clip clip = make_clip(1, 0, 25);
  const auto seqs = segment_clip(clip);

  std::set<std::size_t> seen;
  for (const auto& seq : seqs)
    for (std::size_t idx : seq.indices) seen.insert(idx);
  CHECK(seen.size() == 24);              // disjoint, 24 distinct frames
  CHECK(seen.count(24) == 0);            // last frame dropped
  CHECK(seqs[0].indices.front() == 0);
  CHECK(seqs[0].indices.back() == 7);
  CHECK(seqs[1].indices.front() == 8);
  CHECK(seqs[2].indices.back() == 23);
  for (const auto& seq : seqs)
    for (std::size_t j = 1; j < seq.indices.size(); ++j)
      CHECK(seq.indices[j] > seq.indices[j - 1]);  // order-preserving
}

TEST_CASE("segment_clip rejects short and malformed clips") {
  CHECK_THROWS_AS(segment_clip(make_clip(1, 0, 24)), std::invalid_argument);

  Clip gap = make_clip(1, 0, 25);
  gap.frames[10].frame_index = 99;
  CHECK_THROWS_AS(segment_clip(gap), std::invalid_argument);

  Clip mixed = make_clip(1, 0, 25);
  mixed.frames[5].video_id = 2;
  CHECK_THROWS_AS(segment_clip(mixed), std::invalid_argument);
}

TEST_CASE("resolve_gaze argmax of a peaked map and row-major tie-break") {
  MapF64 peaked(256, 256);
  peaked.at(100, 200) = 5.0;
  const auto g = argmax_row_major(peaked);
  CHECK(g.x == 100);
  CHECK(g.y == 200);

  MapF64 constant(64, 64);
  for (auto& v : constant.data) v = 1.0;
  const auto tie = argmax_row_major(constant);
  CHECK(tie.x == 0);
  CHECK(tie.y == 0);
}

TEST_CASE("resolve_gaze passes ground truth through and flags missing gaze") {
  Clip clip = make_clip(3, 0, 25, 540);
  for (auto& f : clip.frames) {
    f.gaze = {37, 411};
    f.has_gaze = true;
  }
  clip.frames[2].gaze = {12, 4};
  const auto seqs = segment_clip(clip);
  GroundTruthGaze src;
  const auto gazes = resolve_gaze(clip, seqs[0], src);
  CHECK(gazes[2].x == 12);
  CHECK(gazes[2].y == 4);
  CHECK(gazes[5].x == 37);
  CHECK(gazes[5].y == 411);

  clip.frames[12].has_gaze = false;
  CHECK_THROWS_AS(resolve_gaze(clip, seqs[1], src), MissingGazeError);
}

TEST_CASE("resolve_gaze predictor mode returns the literal argmax") {
  Clip clip = make_clip(4, 0, 25, 32);
  Rng rng(21);
  for (auto& f : clip.frames)
    for (auto& b : f.pixels.data) b = static_cast<std::uint8_t>(rng.next_below(256));
  StubSaliencyPredictor src;
  const auto seqs = segment_clip(clip);
  const auto maps = src.predict(clip, seqs[0]);
  const auto gazes = resolve_gaze(clip, seqs[0], src);
  for (std::size_t i = 0; i < kSequenceFrames; ++i) {
    const double got = maps[i].at(gazes[i].x, gazes[i].y);
    for (const double v : maps[i].data) CHECK(got >= v);
  }
}

TEST_CASE("stub saliency: static sequence fixates the frame center") {
  const int side = 64;
  std::vector<ImageU8> frames(8, ImageU8(side, side));
  for (auto& f : frames)
    for (std::size_t p = 0; p < f.data.size(); ++p) f.data[p] = 120;
  std::vector<const ImageU8*> ptrs;
  for (const auto& f : frames) ptrs.push_back(&f);

  const auto maps = stub_saliency(ptrs, {});
  REQUIRE(maps.size() == 8);
  for (const auto& map : maps) {
    const auto g = argmax_row_major(map);
    CHECK(g.x == side / 2);
    CHECK(g.y == side / 2);
    for (const double v : map.data) CHECK(v >= 0.0);
  }
}

TEST_CASE("stub saliency tracks a bright moving dot") {
  const int side = 64;
  StubSaliencyConfig cfg;
  cfg.consistency_radius = 16;
  // Dot starts at the center and drifts within the consistency radius.
  std::vector<ImageU8> frames;
  std::vector<geom::GazePoint> dots;
  for (int i = 0; i < 8; ++i) {
    ImageU8 f(side, side);
    const geom::GazePoint dot{side / 2 + 3 * i, side / 2 - 2 * i};
    f.at(dot.x, dot.y, 0) = 255;
    f.at(dot.x, dot.y, 1) = 255;
    f.at(dot.x, dot.y, 2) = 255;
    frames.push_back(std::move(f));
    dots.push_back(dot);
  }
  std::vector<const ImageU8*> ptrs;
  for (const auto& f : frames) ptrs.push_back(&f);
  const auto maps = stub_saliency(ptrs, cfg);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto g = argmax_row_major(maps[i]);
    CHECK(std::abs(g.x - dots[i].x) <= 1);
    CHECK(std::abs(g.y - dots[i].y) <= 1);
  }
}

TEST_CASE("stub saliency bounds consecutive argmax displacement on random input") {
  const int side = 48;
  StubSaliencyConfig cfg;
  cfg.consistency_radius = 10;
  Rng rng(5);
  std::vector<ImageU8> frames;
  for (int i = 0; i < 8; ++i) {
    ImageU8 f(side, side);
    for (auto& b : f.data) b = static_cast<std::uint8_t>(rng.next_below(256));
    frames.push_back(std::move(f));
  }
  std::vector<const ImageU8*> ptrs;
  for (const auto& f : frames) ptrs.push_back(&f);
  const auto maps = stub_saliency(ptrs, cfg);
  geom::GazePoint prev = argmax_row_major(maps[0]);
  for (std::size_t i = 1; i < maps.size(); ++i) {
    const auto g = argmax_row_major(maps[i]);
    CHECK(std::abs(g.x - prev.x) <= cfg.consistency_radius);
    CHECK(std::abs(g.y - prev.y) <= cfg.consistency_radius);
    prev = g;
  }
}

TEST_CASE("shard round-trip is bit-identical for random records") {
  const fs::path dir = fresh_dir("fvss_shard_rt");
  Rng rng(17);
  std::vector<FrameRecord> written;
  {
    ShardWriter writer(dir, 64);  // force several shard files
    for (int i = 0; i < 1000; ++i) {
      written.push_back(random_record(rng, 8));
      writer.write(written.back());
    }
    Manifest m;
    m.entries = writer.finalize();
    write_manifest(m, dir / "manifest.tsv");
  }
  const Manifest manifest = read_manifest(dir / "manifest.tsv");
  CHECK(manifest.entries.size() == 1000 / 64 + 1);
  CHECK(manifest.total_records() == 1000);

  ShardReader reader(manifest, dir);
  FrameRecord rec;
  std::size_t i = 0;
  while (reader.next(rec)) {
    REQUIRE(i < written.size());
    CHECK(records_equal(rec, written[i]));
    i++;
  }
  CHECK(i == written.size());
  CHECK(reader.crc_mismatches() == 0);
  CHECK(reader.truncated_records() == 0);
}

TEST_CASE("corrupted crc rejects that record and keeps streaming") {
  const fs::path dir = fresh_dir("fvss_shard_crc");
  Rng rng(23);
  std::vector<FrameRecord> written;
  {
    ShardWriter writer(dir, 1000);
    for (int i = 0; i < 10; ++i) {
      written.push_back(random_record(rng, 4));
      writer.write(written.back());
    }
    Manifest m;
    m.entries = writer.finalize();
    write_manifest(m, dir / "manifest.tsv");
  }
  // Flip one payload byte of the 4th record.
  const fs::path shard = dir / "shard_00000.fvss";
  const std::size_t record_bytes = encode_record(written[0]).size();
  {
    std::fstream f(shard, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(6 + 3 * record_bytes + 30));
    char b;
    f.seekg(f.tellp());
    f.get(b);
    f.seekp(-1, std::ios::cur);
    b = static_cast<char>(b ^ 0x5a);
    f.put(b);
  }
  const Manifest manifest = read_manifest(dir / "manifest.tsv");
  ShardReader reader(manifest, dir);
  FrameRecord rec;
  std::vector<FrameRecord> got;
  while (reader.next(rec)) got.push_back(rec);
  CHECK(got.size() == 9);
  CHECK(reader.crc_mismatches() == 1);
  CHECK(records_equal(got[3], written[4]));  // stream resumed after the bad one
}

TEST_CASE("truncated shard errors on the truncated record only") {
  const fs::path dir = fresh_dir("fvss_shard_trunc");
  Rng rng(29);
  std::vector<FrameRecord> written;
  {
    ShardWriter writer(dir, 1000);
    for (int i = 0; i < 5; ++i) {
      written.push_back(random_record(rng, 4));
      writer.write(written.back());
    }
    Manifest m;
    m.entries = writer.finalize();
    write_manifest(m, dir / "manifest.tsv");
  }
  const fs::path shard = dir / "shard_00000.fvss";
  const auto full = fs::file_size(shard);
  fs::resize_file(shard, full - 20);  // cut into the last record

  ShardReader reader(read_manifest(dir / "manifest.tsv"), dir);
  FrameRecord rec;
  std::size_t count = 0;
  while (reader.next(rec)) {
    CHECK(records_equal(rec, written[count]));
    count++;
  }
  CHECK(count == 4);
  CHECK(reader.truncated_records() == 1);
}

TEST_CASE("empty manifest yields an empty stream") {
  const fs::path dir = fresh_dir("fvss_shard_empty");
  Manifest m;
  write_manifest(m, dir / "manifest.tsv");
  ShardReader reader(read_manifest(dir / "manifest.tsv"), dir);
  FrameRecord rec;
  CHECK_FALSE(reader.next(rec));
}

TEST_CASE("build_shards: 50-frame video yields 48 records") {
  const fs::path root = fresh_dir("fvss_ingest_50");
  write_video_dir(root / "video_000", 50, 64, true);
  const auto videos = scan_video_root(root);
  REQUIRE(videos.size() == 1);

  GroundTruthGaze src;
  IngestOptions opt;
  opt.spec = {32, 64};
  IngestStats stats;
  const fs::path out = root / "shards";
  const Manifest manifest = build_shards(videos, src, opt, out, &stats);
  CHECK(manifest.total_records() == 48);
  CHECK(stats.records_written == 48);
  CHECK(manifest.skipped == 0);
  CHECK_FALSE(manifest.partial);

  const auto records = read_all_records(manifest, out);
  REQUIRE(records.size() == 48);
  for (const auto& rec : records) {
    CHECK(rec.pixels.width == 32);
    CHECK(geom::corrected_in_bounds({rec.gaze.x, rec.gaze.y}, opt.spec));
    CHECK(rec.gaze_origin == GazeOrigin::GroundTruth);
  }
  // Frame indices 24 and 49 were dropped by segmentation.
  for (const auto& rec : records) {
    CHECK(rec.frame_index != 24);
    CHECK(rec.frame_index != 49);
  }
}

TEST_CASE("build_shards: empty source gives an empty manifest") {
  const fs::path root = fresh_dir("fvss_ingest_empty");
  GroundTruthGaze src;
  IngestOptions opt;
  opt.spec = {32, 64};
  const Manifest manifest = build_shards({}, src, opt, root / "shards", nullptr);
  CHECK(manifest.total_records() == 0);
  CHECK(manifest.skipped == 0);
}

TEST_CASE("build_shards: identity crop stores full frames byte-compare") {
  const fs::path root = fresh_dir("fvss_ingest_id");
  write_video_dir(root / "video_000", 25, 48, true);
  const auto videos = scan_video_root(root);
  GroundTruthGaze src;
  IngestOptions opt;
  opt.spec = {48, 48};  // n = R
  const fs::path out = root / "shards";
  const Manifest manifest = build_shards(videos, src, opt, out, nullptr);
  const auto records = read_all_records(manifest, out);
  REQUIRE(records.size() == 24);
  for (const auto& rec : records) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06u.ppm", rec.frame_index);
    const ImageU8 source = read_ppm(root / "video_000" / "frames" / name);
    CHECK(rec.pixels.data == source.data);
  }
}

TEST_CASE("build_shards: missing ground-truth gaze skips the clip") {
  const fs::path root = fresh_dir("fvss_ingest_nogaze");
  write_video_dir(root / "video_000", 50, 64, true, /*missing_gaze_at=*/30);
  const auto videos = scan_video_root(root);
  GroundTruthGaze src;
  IngestOptions opt;
  opt.spec = {32, 64};
  IngestStats stats;
  const Manifest manifest = build_shards(videos, src, opt, root / "shards", &stats);
  CHECK(manifest.total_records() == 24);  // second clip skipped
  CHECK(manifest.skipped == 1);
}

TEST_CASE("build_shards: short video is skipped and counted") {
  const fs::path root = fresh_dir("fvss_ingest_short");
  write_video_dir(root / "video_000", 24, 64, true);
  const auto videos = scan_video_root(root);
  GroundTruthGaze src;
  IngestOptions opt;
  opt.spec = {32, 64};
  IngestStats stats;
  const Manifest manifest = build_shards(videos, src, opt, root / "shards", &stats);
  CHECK(manifest.total_records() == 0);
  CHECK(manifest.skipped == 1);
}

TEST_CASE("build_shards: center mode crops at the frame center") {
  const fs::path root = fresh_dir("fvss_ingest_center");
  write_video_dir(root / "video_000", 25, 64, true);
  const auto videos = scan_video_root(root);
  GroundTruthGaze src;
  IngestOptions opt;
  opt.spec = {32, 64};
  opt.crop_mode = CropMode::Center;
  const fs::path out = root / "shards";
  const Manifest manifest = build_shards(videos, src, opt, out, nullptr);
  for (const auto& rec : read_all_records(manifest, out)) {
    CHECK(rec.gaze.x == 32);
    CHECK(rec.gaze.y == 32);
  }
}

}  // TEST_SUITE
