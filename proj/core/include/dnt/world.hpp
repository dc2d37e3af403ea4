#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dnt/tensor.hpp"

namespace dnt {

/// One frame of segmenter-style output: N query slots, each either holding
/// a visible object's query or a zero row with identity -1.
struct QueryFrame {
  Tensor queries;              // N x C
  std::vector<int> identity;   // object id per slot, -1 for an empty slot

  std::size_t slots() const noexcept { return identity.size(); }
  bool visible(std::size_t slot) const { return identity[slot] >= 0; }
  std::size_t num_visible() const;

  bool operator==(const QueryFrame&) const = default;
};

struct Sequence {
  std::vector<QueryFrame> frames;
  std::size_t num_objects = 0;        // K
  std::size_t position_channels = 0;  // P: trailing channels carrying position
  std::vector<double> occlusion_fraction;  // per object, fraction of frames not visible

  std::size_t length() const noexcept { return frames.size(); }
  std::size_t slots() const { return frames.at(0).slots(); }
  std::size_t channels() const { return frames.at(0).queries.cols(); }

  bool operator==(const Sequence&) const = default;
};

struct WorldConfig {
  std::size_t frames = 24;            // T
  std::size_t slots = 8;              // N
  std::size_t channels = 16;          // C
  std::size_t objects = 6;            // K
  double drift_sigma = 0.05;
  double occlusion_rate = 0.25;
  std::size_t confusion_pairs = 2;
  std::size_t position_channels = 4;  // P
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Side information from generation, for tests that need ground truth the
/// Sequence does not carry.
struct GenerationTrace {
  /// slot_of_object[t][k]: slot of object k in frame t, or -1 when occluded.
  std::vector<std::vector<int>> slot_of_object;
  /// positions[t][k]: 2-D position of object k in frame t.
  std::vector<std::vector<std::array<double, 2>>> positions;
};

/// Deterministic in config.seed. Every object is visible in frame 0, which
/// therefore defines each object's canonical slot. Appearance channels
/// (the first C-P) are unit-norm per visible row; position channels carry
/// a Fourier encoding of the object's 2-D position.
Sequence gen_sequence(const WorldConfig& config, GenerationTrace* trace = nullptr);

enum class Stratum { kLight, kModerate, kHeavy };

/// light < 0.25 <= moderate < 0.5 <= heavy.
Stratum stratum_of(double occlusion_fraction) noexcept;
std::vector<Stratum> stratify_occlusion(const Sequence& seq);
const char* stratum_name(Stratum s) noexcept;

/// Structural checks shared by the generator, loaders and trackers.
void validate_sequence(const Sequence& seq);

}  // namespace dnt
