#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dnt/tracker.hpp"

namespace dnt {

/// DNT1 layout (little-endian): "DNT1", u32 version=1, u32 L, C, H,
/// u32 parameter count, then per parameter (in TrackerModel::parameters()
/// order) u16 name length, name bytes, u8 ndim, u32 dims, f64 values.
/// A trailer follows: u64 config fingerprint, u64 final step.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t config_fingerprint = 0;
  std::uint64_t step = 0;

  bool operator==(const CheckpointMeta&) const = default;
};

/// 64-bit FNV-1a; used to fingerprint the JSON training config.
std::uint64_t fingerprint(std::string_view text) noexcept;

std::vector<char> encode_checkpoint(const TrackerModel& model, const CheckpointMeta& meta);
/// Throws FormatError carrying the byte offset of the failure.
TrackerModel decode_checkpoint(const std::vector<char>& bytes, CheckpointMeta* meta = nullptr);

void save_checkpoint(const TrackerModel& model, const CheckpointMeta& meta, const std::string& path);
TrackerModel load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace dnt
