#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dnt/tensor.hpp"

namespace dnt {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const std::vector<std::size_t>& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records forward operations in order and replays their backward rules in
/// reverse. Leaves bound to external tensors (model parameters) receive
/// their gradients by accumulation into Tensor::grad() when backward() runs.
///
/// Single-threaded: one tape per training or inference pass.
class Tape {
 public:
  /// Backward rule: reads grad(out) and accumulates into the grads of its inputs.
  using BackwardFn = std::function<void(Tape&, std::size_t out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value that never receives a gradient.
  Var constant(Tensor value);
  /// Gradient-tracking input that is not bound to any external tensor.
  Var variable(Tensor value);
  /// Binds a parameter. If param.requires_grad(), backward() accumulates into param.grad().
  Var leaf(Tensor& param);

  /// Records an op result. `fn` may be empty when no input needs a gradient.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

  /// Runs the backward pass from a scalar loss. Node gradients are reset
  /// first, so calling this twice yields identical node gradients.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  /// Gradient buffer of a node (allocated lazily, zero-initialized).
  std::vector<double>& grad(std::size_t id);
  /// Gradient of a node after backward(); zeros if the node was never reached.
  Tensor gradient(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    std::vector<double> grad;
    Tensor* bound = nullptr;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace dnt
