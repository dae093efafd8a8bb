#include "fvss/shard.hpp"

#include <zlib.h>

#include <cstring>
#include <stdexcept>

#include "fvss/errors.hpp"

namespace fvss::ingest {

namespace {

void put_u16(std::vector<std::uint8_t>& buf, std::uint16_t v) {
  buf.push_back(static_cast<std::uint8_t>(v & 0xff));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint32_t crc_of(const std::uint8_t* data, std::size_t len) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(len)));
}

// Fixed-size part of a record before the payload.
constexpr std::size_t kRecordHeadBytes = 8 + 4 + 4 + 2 + 2 + 1 + 2 + 4;

}  // namespace

std::vector<std::uint8_t> encode_record(const FrameRecord& rec) {
  if (rec.pixels.width != rec.pixels.height)
    throw std::invalid_argument("shard records hold square images");
  const std::uint16_t n = static_cast<std::uint16_t>(rec.pixels.width);
  const std::uint32_t payload_len = static_cast<std::uint32_t>(rec.pixels.data.size());

  std::vector<std::uint8_t> buf;
  buf.reserve(kRecordHeadBytes + payload_len + 4);
  put_u64(buf, rec.video_id);
  put_u32(buf, rec.frame_index);
  put_u32(buf, rec.timestamp_ms);
  put_u16(buf, static_cast<std::uint16_t>(rec.gaze.x));
  put_u16(buf, static_cast<std::uint16_t>(rec.gaze.y));
  buf.push_back(static_cast<std::uint8_t>(rec.gaze_origin));
  put_u16(buf, n);
  put_u32(buf, payload_len);
  buf.insert(buf.end(), rec.pixels.data.begin(), rec.pixels.data.end());
  put_u32(buf, crc_of(buf.data(), buf.size()));
  return buf;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write manifest " + path.string());
  for (const auto& e : manifest.entries) out << e.path << "\t" << e.record_count << "\n";
  if (manifest.partial) out << "partial\t1\n";
  out << "skipped\t" << manifest.skipped << "\n";
  if (!out) throw UserError("manifest write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  bool saw_footer = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw UserError("malformed manifest line: " + line);
    const std::string key = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    if (key == "skipped") {
      m.skipped = std::stoull(value);
      saw_footer = true;
    } else if (key == "partial") {
      m.partial = value == "1";
    } else {
      m.entries.push_back({key, std::stoull(value)});
    }
  }
  if (!saw_footer) throw UserError("manifest missing skipped footer: " + path.string());
  return m;
}

ShardWriter::ShardWriter(std::filesystem::path dir, std::uint64_t max_records_per_shard)
    : dir_(std::move(dir)), max_per_shard_(max_records_per_shard) {
  if (max_per_shard_ == 0) throw std::invalid_argument("max_records_per_shard must be > 0");
  std::filesystem::create_directories(dir_);
}

void ShardWriter::open_next() {
  if (out_.is_open()) {
    out_.close();
    entries_.push_back({current_name_, current_count_});
  }
  char name[32];
  std::snprintf(name, sizeof(name), "shard_%05zu.fvss", entries_.size());
  current_name_ = name;
  current_count_ = 0;
  out_.open(dir_ / current_name_, std::ios::binary | std::ios::trunc);
  if (!out_) throw UserError("cannot open shard file " + (dir_ / current_name_).string());
  out_.write(kShardMagic, 4);
  const std::uint8_t ver[2] = {kShardVersion & 0xff, kShardVersion >> 8};
  out_.write(reinterpret_cast<const char*>(ver), 2);
}

void ShardWriter::write(const FrameRecord& rec) {
  if (!out_.is_open() || current_count_ >= max_per_shard_) open_next();
  const std::vector<std::uint8_t> bytes = encode_record(rec);
  out_.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!out_) throw UserError("shard write failed in " + (dir_ / current_name_).string());
  current_count_++;
}

std::vector<ManifestEntry> ShardWriter::finalize() {
  if (out_.is_open()) {
    out_.close();
    entries_.push_back({current_name_, current_count_});
  }
  return entries_;
}

ShardReader::ShardReader(const Manifest& manifest, std::filesystem::path base_dir)
    : manifest_(manifest), base_dir_(std::move(base_dir)) {}

bool ShardReader::open_next_shard() {
  while (shard_index_ < manifest_.entries.size()) {
    const std::filesystem::path p = base_dir_ / manifest_.entries[shard_index_].path;
    shard_index_++;
    in_.close();
    in_.clear();
    in_.open(p, std::ios::binary);
    if (!in_) throw UserError("cannot open shard " + p.string());
    char magic[4];
    std::uint8_t ver[2];
    if (!in_.read(magic, 4) || std::memcmp(magic, kShardMagic, 4) != 0)
      throw UserError("bad shard magic in " + p.string());
    if (!in_.read(reinterpret_cast<char*>(ver), 2) || get_u16(ver) != kShardVersion)
      throw UserError("unsupported shard version in " + p.string());
    shard_open_ = true;
    return true;
  }
  return false;
}

bool ShardReader::next(FrameRecord& out) {
  for (;;) {
    if (!shard_open_ && !open_next_shard()) return false;

    std::uint8_t head[kRecordHeadBytes];
    in_.read(reinterpret_cast<char*>(head), sizeof(head));
    if (in_.gcount() == 0) {  // clean end of shard
      shard_open_ = false;
      continue;
    }
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(head))) {
      truncated_++;
      shard_open_ = false;
      continue;
    }
    const std::uint32_t payload_len = get_u32(head + kRecordHeadBytes - 4);
    std::vector<std::uint8_t> payload(payload_len);
    in_.read(reinterpret_cast<char*>(payload.data()), payload_len);
    std::uint8_t crc_bytes[4];
    if (in_.gcount() != static_cast<std::streamsize>(payload_len) ||
        !in_.read(reinterpret_cast<char*>(crc_bytes), 4)) {
      truncated_++;
      shard_open_ = false;
      continue;
    }

    std::uint32_t crc = crc_of(head, sizeof(head));
    crc = static_cast<std::uint32_t>(
        crc32(crc, payload.data(), static_cast<uInt>(payload.size())));
    const std::uint16_t n = get_u16(head + 21);
    if (crc != get_u32(crc_bytes) ||
        payload_len != static_cast<std::uint32_t>(n) * n * 3) {
      crc_mismatches_++;
      continue;  // reject this record, keep streaming
    }

    out.video_id = get_u64(head);
    out.frame_index = get_u32(head + 8);
    out.timestamp_ms = get_u32(head + 12);
    out.gaze = {get_u16(head + 16), get_u16(head + 18)};
    out.has_gaze = true;
    out.gaze_origin = static_cast<GazeOrigin>(head[20] != 0);
    out.pixels = ImageU8(n, n);
    out.pixels.data.assign(payload.begin(), payload.end());
    return true;
  }
}

std::vector<FrameRecord> read_all_records(const Manifest& manifest,
                                          const std::filesystem::path& base_dir) {
  std::vector<FrameRecord> records;
  records.reserve(manifest.total_records());
  ShardReader reader(manifest, base_dir);
  FrameRecord rec;
  while (reader.next(rec)) records.push_back(std::move(rec));
  return records;
}

}  // namespace fvss::ingest
