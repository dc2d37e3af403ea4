#include "dnt/noise.hpp"

#include <algorithm>

#include "dnt/error.hpp"

namespace dnt {

namespace {

void require_queries(const Tensor& q, const char* op) {
  if (q.rank() != 2) throw DimensionError(std::string(op) + ": expected N x C queries, got " + shape_to_string(q.shape()));
}

std::vector<std::size_t> identity_perm(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return p;
}

int draw_partner(Rng& rng, std::size_t i, std::size_t n, bool exclude_self) {
  if (!exclude_self || n == 1) return static_cast<int>(rng.uniform_index(n));
  std::size_t j = rng.uniform_index(n - 1);
  if (j >= i) ++j;
  return static_cast<int>(j);
}

void check_partners(const std::vector<int>& partners, std::size_t n) {
  if (partners.size() != n) throw DimensionError("noise: partner list length differs from N");
  for (int j : partners)
    if (j < 0 || static_cast<std::size_t>(j) >= n) throw IndexError("noise: partner " + std::to_string(j) + " out of range");
}

}  // namespace

std::string_view strategy_name(NoiseStrategy s) noexcept {
  switch (s) {
    case NoiseStrategy::kNone:
      return "none";
    case NoiseStrategy::kWeightedAverage:
      return "weighted_average";
    case NoiseStrategy::kCropConcat:
      return "crop_concat";
    case NoiseStrategy::kShuffle:
      return "shuffle";
  }
  return "none";
}

std::optional<NoiseStrategy> parse_strategy(std::string_view name) noexcept {
  for (NoiseStrategy s : {NoiseStrategy::kNone, NoiseStrategy::kWeightedAverage, NoiseStrategy::kCropConcat,
                          NoiseStrategy::kShuffle}) {
    if (strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

Tensor weighted_average_rows(const Tensor& q, const std::vector<double>& alphas, const std::vector<int>& partners) {
  require_queries(q, "weighted_average");
  const std::size_t n = q.dim(0), c = q.dim(1);
  check_partners(partners, n);
  if (alphas.size() != n) throw DimensionError("weighted_average: alpha list length differs from N");
  Tensor out(q.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const auto self = q.row(i);
    const auto other = q.row(static_cast<std::size_t>(partners[i]));
    const double a = alphas[i];
    // a*x + (1-a)*x need not round back to x; a self-partner is exact.
    if (static_cast<std::size_t>(partners[i]) == i) {
      std::copy_n(self.begin(), c, out.row(i).begin());
      continue;
    }
    for (std::size_t k = 0; k < c; ++k) out.at(i, k) = a * self[k] + (1.0 - a) * other[k];
  }
  return out;
}

Tensor crop_concat_rows(const Tensor& q, const std::vector<std::size_t>& cuts, const std::vector<int>& partners) {
  require_queries(q, "crop_concat");
  const std::size_t n = q.dim(0), c = q.dim(1);
  check_partners(partners, n);
  if (cuts.size() != n) throw DimensionError("crop_concat: cut list length differs from N");
  Tensor out(q.shape());
  for (std::size_t i = 0; i < n; ++i) {
    if (cuts[i] > c) throw IndexError("crop_concat: cut " + std::to_string(cuts[i]) + " exceeds C");
    const auto self = q.row(i);
    const auto other = q.row(static_cast<std::size_t>(partners[i]));
    for (std::size_t k = 0; k < c; ++k) out.at(i, k) = k < cuts[i] ? self[k] : other[k];
  }
  return out;
}

Tensor permute_rows(const Tensor& q, const std::vector<std::size_t>& perm) {
  require_queries(q, "permute_rows");
  const std::size_t n = q.dim(0), c = q.dim(1);
  if (perm.size() != n) throw DimensionError("permute_rows: permutation length differs from N");
  Tensor out(q.shape());
  for (std::size_t i = 0; i < n; ++i) {
    if (perm[i] >= n) throw IndexError("permute_rows: index " + std::to_string(perm[i]) + " out of range");
    std::copy_n(q.row(perm[i]).begin(), c, out.row(i).begin());
  }
  return out;
}

NoiseOutcome noise_weighted_average(const Tensor& q, Rng& rng, const NoiseOptions& opts) {
  require_queries(q, "noise_weighted_average");
  const std::size_t n = q.dim(0);
  NoiseOutcome out;
  out.alphas.resize(n);
  out.partners.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.alphas[i] = rng.uniform_open01();
    out.partners[i] = draw_partner(rng, i, n, opts.exclude_self);
  }
  out.noised = weighted_average_rows(q, out.alphas, out.partners);
  out.permutation = identity_perm(n);
  return out;
}

NoiseOutcome noise_crop_concat(const Tensor& q, Rng& rng, const NoiseOptions& opts) {
  require_queries(q, "noise_crop_concat");
  const std::size_t n = q.dim(0), c = q.dim(1);
  NoiseOutcome out;
  out.cuts.resize(n);
  out.partners.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.cuts[i] = rng.uniform_index(c + 1);
    out.partners[i] = draw_partner(rng, i, n, opts.exclude_self);
  }
  out.noised = crop_concat_rows(q, out.cuts, out.partners);
  out.permutation = identity_perm(n);
  return out;
}

NoiseOutcome noise_shuffle(const Tensor& q, Rng& rng) {
  require_queries(q, "noise_shuffle");
  const std::size_t n = q.dim(0);
  NoiseOutcome out;
  out.permutation = rng.permutation(n);
  out.partners.assign(n, -1);
  out.noised = permute_rows(q, out.permutation);
  return out;
}

NoiseOutcome apply_noise(NoiseStrategy strategy, const Tensor& q, Rng& rng, const NoiseOptions& opts) {
  switch (strategy) {
    case NoiseStrategy::kWeightedAverage:
      return noise_weighted_average(q, rng, opts);
    case NoiseStrategy::kCropConcat:
      return noise_crop_concat(q, rng, opts);
    case NoiseStrategy::kShuffle:
      return noise_shuffle(q, rng);
    case NoiseStrategy::kNone:
      break;
  }
  require_queries(q, "apply_noise");
  NoiseOutcome out;
  out.noised = q;
  out.permutation = identity_perm(q.dim(0));
  out.partners.assign(q.dim(0), -1);
  return out;
}

}  // namespace dnt
