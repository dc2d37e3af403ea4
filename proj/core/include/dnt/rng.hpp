#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dnt {

/// Seeded random stream over std::mt19937_64.
///
/// The distributions are written out here rather than taken from <random>
/// because the standard library distributions are not bit-reproducible
/// across implementations. Every draw is defined in terms of raw 64-bit
/// engine outputs:
///   - uniform_index(n): rejection sampling, accept x < n * floor(2^64 / n),
///     return x % n.
///   - uniform_open01(): ((x >> 11) + 0.5) * 2^-53, strictly inside (0, 1).
///   - normal(): Box-Muller on two uniform_open01() draws (cosine branch only).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  std::size_t uniform_index(std::size_t n);
  double uniform_open01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open01(); }
  double normal();
  bool bernoulli(double p) { return uniform_open01() < p; }

  /// Uniform permutation of [0, n) by Fisher-Yates: for i = n-1 down to 1,
  /// swap(perm[i], perm[uniform_index(i + 1)]), starting from the identity.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent sub-stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for sub-stream (`tag`, `index`) of a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag, std::uint64_t index = 0);

/// Stream tags. Distinct tags never collide for the same root seed.
namespace stream {
inline constexpr std::uint64_t kTrainWorld = 0x5452'4149'4e00ULL;
inline constexpr std::uint64_t kEvalWorld = 0x4556'414c'0000ULL;
inline constexpr std::uint64_t kNoise = 0x4e4f'4953'4500ULL;
inline constexpr std::uint64_t kModelInit = 0x494e'4954'0000ULL;
inline constexpr std::uint64_t kInferenceNoise = 0x494e'4e53'0000ULL;
}  // namespace stream

}  // namespace dnt
