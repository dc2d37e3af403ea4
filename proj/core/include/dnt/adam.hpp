#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dnt/tensor.hpp"

namespace dnt {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for a fixed list of parameters.
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamHyper hyper, std::span<Tensor* const> params);

  const AdamHyper& hyper() const noexcept { return hyper_; }
  std::uint64_t step() const noexcept { return step_; }
  const std::vector<std::vector<double>>& first_moment() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moment() const noexcept { return v_; }

  /// One bias-corrected Adam update of every parameter from its grad().
  /// Throws DimensionError if a parameter no longer matches its moments.
  void step(std::span<Tensor* const> params);

 private:
  AdamHyper hyper_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace dnt
