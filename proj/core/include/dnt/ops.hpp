#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dnt/tape.hpp"

// Differentiable operations over Tape-recorded values.
//
// Broadcasting is limited to two forms: a shape-{1} scalar against any
// tensor, and a rank-1 row vector [C] against a tensor whose last axis is C.
// Reductions sum sequentially in row-major order, so results are
// bit-reproducible.

namespace dnt {

Var matmul(Var a, Var b);
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// Row r of the result is row r of `a` if take_first[r], else row r of `b`.
Var select_rows(const std::vector<bool>& take_first, Var a, Var b);
Var scale(Var a, double factor);

Var concat_last(std::span<const Var> parts);
Var slice_last(Var a, std::size_t begin, std::size_t end);

Var gelu(Var a);
Var relu(Var a);

Var sum(Var a);
Var mean(Var a);

/// Numerically stable softmax along `axis` (maximum subtracted per slice).
Var softmax(Var a, std::size_t axis);

/// Normalizes each row over the last axis, then applies gain and bias.
Var layer_norm(Var x, Var gamma, Var beta, double epsilon);

/// Mean over rows of -log softmax(logits)[target]. Logits are [B x K].
Var cross_entropy(Var logits, std::span<const std::size_t> targets);

/// softmax(q k^T * scale) v for q [n x d], k [m x d], v [m x dv].
Var attention(Var q, Var k, Var v, double scale);

/// Copy of the value with no gradient path.
Var detach(Var a);

}  // namespace dnt
