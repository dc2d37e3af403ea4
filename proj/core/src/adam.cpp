#include "dnt/adam.hpp"

#include <cmath>

#include "dnt/error.hpp"

namespace dnt {

AdamState::AdamState(AdamHyper hyper, std::span<Tensor* const> params) : hyper_(hyper) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor* p : params) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void AdamState::step(std::span<Tensor* const> params) {
  if (params.size() != m_.size()) {
    throw DimensionError("adam: " + std::to_string(params.size()) + " parameters but state holds " +
                         std::to_string(m_.size()));
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p]->size() != m_[p].size() || params[p]->grad().size() != m_[p].size()) {
      throw DimensionError("adam: parameter " + std::to_string(p) + " has shape " +
                           shape_to_string(params[p]->shape()) + ", state expects " + std::to_string(m_[p].size()) +
                           " values");
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(hyper_.beta1, t);
  const double c2 = 1.0 - std::pow(hyper_.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    std::vector<double>& w = params[p]->data();
    const std::vector<double>& g = params[p]->grad();
    std::vector<double>& m = m_[p];
    std::vector<double>& v = v_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = hyper_.beta1 * m[i] + (1.0 - hyper_.beta1) * g[i];
      v[i] = hyper_.beta2 * v[i] + (1.0 - hyper_.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= hyper_.learning_rate * mhat / (std::sqrt(vhat) + hyper_.epsilon);
    }
  }
}

}  // namespace dnt
