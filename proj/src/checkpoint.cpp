#include "fvss/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "fvss/errors.hpp"

namespace fvss::nn {

namespace {

void put_u16(std::vector<std::uint8_t>& buf, std::uint16_t v) {
  buf.push_back(static_cast<std::uint8_t>(v & 0xff));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& buf, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

void put_string(std::vector<std::uint8_t>& buf, const std::string& s) {
  put_u32(buf, static_cast<std::uint32_t>(s.size()));
  buf.insert(buf.end(), s.begin(), s.end());
}

class ByteCursor {
 public:
  ByteCursor(const std::vector<std::uint8_t>& bytes, std::size_t end)
      : bytes_(bytes), end_(end) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= end_; }

  const std::uint8_t* take(std::size_t n) {
    if (pos_ + n > end_) throw UserError("truncated checkpoint");
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::uint16_t u16() {
    const std::uint8_t* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    const std::uint8_t* p = take(4);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  double f64() {
    const std::uint8_t* p = take(8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
    return std::bit_cast<double>(bits);
  }
  std::string str() {
    const std::uint32_t len = u32();
    const std::uint8_t* p = take(len);
    return std::string(reinterpret_cast<const char*>(p), len);
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

void append_tensors(std::vector<std::uint8_t>& buf, const std::string& prefix,
                    const Network& net) {
  for (const auto& p : net.parameters()) {
    put_string(buf, prefix + p.name);
    buf.push_back(static_cast<std::uint8_t>(p.tensor->rank()));
    for (const std::size_t d : p.tensor->shape) put_u32(buf, static_cast<std::uint32_t>(d));
    for (const double v : p.tensor->v) put_f64(buf, v);
  }
}

}  // namespace

void save_checkpoint(const EncoderState& state, const std::filesystem::path& path) {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), kCheckpointMagic, kCheckpointMagic + 4);
  put_u16(buf, kCheckpointVersion);
  put_string(buf, state.query.config().descriptor());
  append_tensors(buf, "q.", state.query);
  append_tensors(buf, "k.", state.key);

  const auto crc = static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), buf.data(), static_cast<uInt>(buf.size())));
  put_u32(buf, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UserError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw UserError("checkpoint write failed: " + path.string());
}

EncoderState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 10) throw UserError("checkpoint too small: " + path.string());

  const std::size_t body_end = bytes.size() - 4;
  std::uint32_t stored_crc = 0;
  for (int i = 3; i >= 0; --i) stored_crc = (stored_crc << 8) | bytes[body_end + i];
  const auto crc = static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(body_end)));
  if (crc != stored_crc) throw UserError("checkpoint crc mismatch: " + path.string());

  ByteCursor cur(bytes, body_end);
  if (std::memcmp(cur.take(4), kCheckpointMagic, 4) != 0)
    throw UserError("bad checkpoint magic: " + path.string());
  if (cur.u16() != kCheckpointVersion)
    throw UserError("unsupported checkpoint version: " + path.string());

  const EncoderConfig cfg = EncoderConfig::from_descriptor(cur.str());
  EncoderState state;
  state.query = Network::build(cfg);
  state.key = Network::build(cfg);

  std::map<std::string, Tensor*> slots;
  for (auto& p : state.query.parameters()) slots["q." + p.name] = p.tensor;
  for (auto& p : state.key.parameters()) slots["k." + p.name] = p.tensor;

  std::size_t filled = 0;
  while (!cur.at_end()) {
    const std::string name = cur.str();
    const std::uint8_t rank = *cur.take(1);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = cur.u32();
    Tensor t(shape);
    for (double& v : t.v) v = cur.f64();

    const auto it = slots.find(name);
    if (it == slots.end()) throw UserError("unknown tensor in checkpoint: " + name);
    if (!it->second->same_shape(t))
      throw UserError("tensor shape mismatch in checkpoint: " + name);
    *it->second = std::move(t);
    filled++;
  }
  if (filled != slots.size()) throw UserError("checkpoint is missing tensors");
  return state;
}

}  // namespace fvss::nn
