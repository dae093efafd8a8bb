#pragma once

#include <filesystem>

#include "fvss/trainer.hpp"

namespace fvss::nn {

// Checkpoint layout (little-endian, bit-exact):
//   magic "FVCK", version u16, architecture descriptor (u32 length + UTF-8),
//   per tensor: name (u32 length + UTF-8), rank u8, dims u32 each, values
//   f64 each; trailing crc32 over all preceding bytes.
// Query tensors are prefixed "q.", momentum tensors "k.".
inline constexpr char kCheckpointMagic[4] = {'F', 'V', 'C', 'K'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const EncoderState& state, const std::filesystem::path& path);
EncoderState load_checkpoint(const std::filesystem::path& path);

}  // namespace fvss::nn
