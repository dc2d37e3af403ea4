#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dnt/rng.hpp"
#include "dnt/tape.hpp"

namespace dnt {

inline constexpr double kGradCheckTolerance = 1e-5;
inline constexpr double kGradCheckStep = 1e-6;

/// |a - n| / max(|a|, |n|, 1e-3). The floor keeps near-zero gradients from
/// turning rounding noise into huge ratios.
double relative_error(double analytic, double numeric) noexcept;

/// Builds an output from tape variables bound to the given inputs.
using GradFn = std::function<Var(Tape&, std::span<const Var>)>;

/// Max relative error between tape gradients and central differences over
/// every input entry. The output is reduced to a scalar by a fixed random
/// projection drawn from `rng`.
double check_gradient(const GradFn& fn, const std::vector<Tensor>& inputs, Rng& rng, double step = kGradCheckStep);

struct GradCheckResult {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t trials = 0;
  bool passed() const noexcept { return max_relative_error < kGradCheckTolerance; }
};

/// Every differentiable op at `trials` random points (entries uniform in
/// [-2, 2]), plus the end-to-end training loss of a small tracker
/// (N=3, C=8, L=1, two frames) with respect to all model parameters.
std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed, std::size_t trials = 10);

}  // namespace dnt
