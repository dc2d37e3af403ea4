#pragma once

#include <string>
#include <vector>

#include "dnt/world.hpp"

namespace dnt {

/// SEQ1 layout (little-endian): "SEQ1", u32 version=1, u32 T, N, C, K, P,
/// f64 occlusion_fraction x K, then per frame f64 queries (N x C row-major)
/// followed by i32 identity x N.
inline constexpr std::uint32_t kSequenceVersion = 1;

std::vector<char> encode_sequence(const Sequence& seq);
/// Throws FormatError carrying the byte offset of the failure.
Sequence decode_sequence(const std::vector<char>& bytes);

void save_sequence(const Sequence& seq, const std::string& path);
Sequence load_sequence(const std::string& path);

}  // namespace dnt
