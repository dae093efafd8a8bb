#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fvss/frames.hpp"

namespace fvss::ingest {

// Shard file layout (little-endian, bit-exact):
//   magic "FVSS", version u16
//   per record: video_id u64, frame_index u32, timestamp_ms u32,
//               gaze_x u16, gaze_y u16, gaze_origin u8, n u16,
//               payload_len u32, payload (n*n*3 raw RGB8), crc32 u32
// The crc covers all record bytes preceding it.
inline constexpr char kShardMagic[4] = {'F', 'V', 'S', 'S'};
inline constexpr std::uint16_t kShardVersion = 1;

struct ManifestEntry {
  std::string path;  // relative to the manifest file
  std::uint64_t record_count = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t skipped = 0;
  bool partial = false;  // writer aborted mid-run

  std::uint64_t total_records() const {
    std::uint64_t n = 0;
    for (const auto& e : entries) n += e.record_count;
    return n;
  }
};

// Line-oriented text: one `path<TAB>record_count` per shard, an optional
// `partial<TAB>1` marker, footer `skipped<TAB>count`.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

// Serializes one record to the exact on-disk byte layout (crc included).
std::vector<std::uint8_t> encode_record(const FrameRecord& rec);

// Rolls over to a new shard file every max_records_per_shard records. One
// writer owns each shard file; finalize() before reading anything back.
class ShardWriter {
 public:
  ShardWriter(std::filesystem::path dir, std::uint64_t max_records_per_shard = 4096);

  void write(const FrameRecord& rec);

  // Closes the current file and returns the manifest entries written so far.
  std::vector<ManifestEntry> finalize();

 private:
  void open_next();

  std::filesystem::path dir_;
  std::uint64_t max_per_shard_;
  std::ofstream out_;
  std::string current_name_;
  std::uint64_t current_count_ = 0;
  std::vector<ManifestEntry> entries_;
};

// Streams records across the manifest's shards in written order. Records with
// a bad crc or malformed payload are rejected individually and counted; a
// truncated file ends that shard only.
class ShardReader {
 public:
  ShardReader(const Manifest& manifest, std::filesystem::path base_dir);

  bool next(FrameRecord& out);

  std::uint64_t crc_mismatches() const { return crc_mismatches_; }
  std::uint64_t truncated_records() const { return truncated_; }

 private:
  bool open_next_shard();

  Manifest manifest_;
  std::filesystem::path base_dir_;
  std::size_t shard_index_ = 0;
  std::ifstream in_;
  bool shard_open_ = false;
  std::uint64_t crc_mismatches_ = 0;
  std::uint64_t truncated_ = 0;
};

// Loads every valid record into memory (desk-scale convenience wrapper).
std::vector<FrameRecord> read_all_records(const Manifest& manifest,
                                          const std::filesystem::path& base_dir);

}  // namespace fvss::ingest
