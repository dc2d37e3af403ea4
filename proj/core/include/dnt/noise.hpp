#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnt/rng.hpp"
#include "dnt/tensor.hpp"

namespace dnt {

enum class NoiseStrategy { kNone, kWeightedAverage, kCropConcat, kShuffle };

/// "none", "weighted_average", "crop_concat", "shuffle".
std::string_view strategy_name(NoiseStrategy s) noexcept;
std::optional<NoiseStrategy> parse_strategy(std::string_view name) noexcept;

/// A noised query set plus everything drawn to produce it.
struct NoiseOutcome {
  Tensor noised;                        // N x C
  std::vector<std::size_t> permutation; // output row i = input row permutation[i] (shuffle), else identity
  std::vector<int> partners;            // partner row j per output row, -1 when unused
  std::vector<double> alphas;           // weighted average only
  std::vector<std::size_t> cuts;        // crop-concat only, k in [0, C]
};

struct NoiseOptions {
  bool exclude_self = false;  // draw partners j != i (when N > 1)
};

// Deterministic cores: apply already-drawn parameters.

/// Row i = alpha[i] * Q[i] + (1 - alpha[i]) * Q[partner[i]].
Tensor weighted_average_rows(const Tensor& q, const std::vector<double>& alphas, const std::vector<int>& partners);
/// Row i = Q[i][:cut[i]] followed by Q[partner[i]][cut[i]:].
Tensor crop_concat_rows(const Tensor& q, const std::vector<std::size_t>& cuts, const std::vector<int>& partners);
/// Row i = Q[perm[i]].
Tensor permute_rows(const Tensor& q, const std::vector<std::size_t>& perm);

// Random strategies. Per-row draw order: weighted average draws alpha then j;
// crop-concat draws k then j; shuffle draws one Fisher-Yates permutation.

NoiseOutcome noise_weighted_average(const Tensor& q, Rng& rng, const NoiseOptions& opts = {});
NoiseOutcome noise_crop_concat(const Tensor& q, Rng& rng, const NoiseOptions& opts = {});
NoiseOutcome noise_shuffle(const Tensor& q, Rng& rng);
NoiseOutcome apply_noise(NoiseStrategy strategy, const Tensor& q, Rng& rng, const NoiseOptions& opts = {});

}  // namespace dnt
