#include "dnt/tape.hpp"

#include <algorithm>

#include "dnt/error.hpp"

namespace dnt {

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor& param) {
  // The tape keeps its own copy of the value; parameters must not change
  // while the tape is alive.
  nodes_.push_back(Node{Tensor(param.shape(), param.data()), {}, {}, {}, &param, param.requires_grad()});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
  bool needs = false;
  for (std::size_t in : inputs) needs = needs || nodes_.at(in).needs_grad;
  if (!needs) fn = nullptr;
  nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(fn), {}, nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

std::vector<double>& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Tensor Tape::gradient(Var v) const {
  const Node& n = nodes_.at(v.id());
  if (n.grad.empty()) return Tensor(n.value.shape(), 0.0);
  return Tensor(n.value.shape(), n.grad);
}

void Tape::backward(Var loss) {
  if (loss.valid() && &loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  if (!loss.valid() || loss.id() >= nodes_.size()) throw ContractError("backward: loss is not on this tape");
  if (!nodes_[loss.id()].value.is_scalar()) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_to_string(nodes_[loss.id()].value.shape()));
  }
  for (Node& n : nodes_) n.grad.clear();
  grad(loss.id())[0] = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.needs_grad) continue;
    if (n.backward) n.backward(*this, id);
  }
  for (Node& n : nodes_) {
    if (!n.bound || !n.bound->requires_grad()) continue;
    std::vector<double>& g = n.bound->grad();
    if (n.grad.empty()) continue;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace dnt
