#include "dnt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dnt/error.hpp"

namespace dnt {

namespace {

const std::vector<std::size_t> kScalarShape{1};

bool is_scalar_shape(const std::vector<std::size_t>& s) { return s == kScalarShape; }

enum class Broadcast { kSame, kScalarB, kScalarA, kRowB, kRowA };

Broadcast classify(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b, const char* op) {
  if (a == b) return Broadcast::kSame;
  if (is_scalar_shape(b)) return Broadcast::kScalarB;
  if (is_scalar_shape(a)) return Broadcast::kScalarA;
  if (b.size() == 1 && a.size() >= 2 && a.back() == b[0]) return Broadcast::kRowB;
  if (a.size() == 1 && b.size() >= 2 && b.back() == a[0]) return Broadcast::kRowA;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_to_string(a) + " and " +
                       shape_to_string(b));
}

// Index into the broadcast operand for output element i.
std::size_t bindex(Broadcast mode, bool is_b, std::size_t i, std::size_t cols) {
  switch (mode) {
    case Broadcast::kSame:
      return i;
    case Broadcast::kScalarB:
      return is_b ? 0 : i;
    case Broadcast::kScalarA:
      return is_b ? i : 0;
    case Broadcast::kRowB:
      return is_b ? i % cols : i;
    case Broadcast::kRowA:
      return is_b ? i : i % cols;
  }
  return i;
}

Var binary_elementwise(Var a, Var b, int sign, const char* name) {
  Tape& tape = a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast mode = classify(av.shape(), bv.shape(), name);
  const Tensor& big = (mode == Broadcast::kScalarA || mode == Broadcast::kRowA) ? bv : av;
  const std::size_t cols = big.cols();
  Tensor out(big.shape(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[bindex(mode, false, i, cols)] + sign * bv[bindex(mode, true, i, cols)];
  }
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib, mode, cols, sign](Tape& t, std::size_t o) {
    const std::vector<double> go = t.grad(o);
    if (t.needs_grad(ia)) {
      auto& ga = t.grad(ia);
      for (std::size_t i = 0; i < go.size(); ++i) ga[bindex(mode, false, i, cols)] += go[i];
    }
    if (t.needs_grad(ib)) {
      auto& gb = t.grad(ib);
      for (std::size_t i = 0; i < go.size(); ++i) gb[bindex(mode, true, i, cols)] += sign * go[i];
    }
  });
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_to_string(t.shape()));
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  if (bv.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions disagree for " + shape_to_string(av.shape()) + " and " +
                         shape_to_string(bv.shape()));
  }
  Tensor out({m, n}, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      const double* brow = bv.data().data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib, m, k, n](Tape& t, std::size_t o) {
    const std::vector<double>& go = t.grad(o);
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    if (t.needs_grad(ia)) {
      auto& ga = t.grad(ia);  // dA = dOut * B^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += go[i * n + j] * B[p * n + j];
          ga[i * k + p] += s;
        }
      }
    }
    if (t.needs_grad(ib)) {
      auto& gb = t.grad(ib);  // dB = A^T * dOut
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double x = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += x * go[i * n + j];
        }
      }
    }
  });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  require_rank2(av, "transpose");
  const std::size_t r = av.dim(0), c = av.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, r, c](Tape& t, std::size_t o) {
    const std::vector<double>& go = t.grad(o);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += go[j * r + i];
  });
}

Var add(Var a, Var b) { return binary_elementwise(a, b, +1, "add"); }
Var sub(Var a, Var b) { return binary_elementwise(a, b, -1, "sub"); }

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast mode = classify(av.shape(), bv.shape(), "mul");
  const Tensor& big = (mode == Broadcast::kScalarA || mode == Broadcast::kRowA) ? bv : av;
  const std::size_t cols = big.cols();
  Tensor out(big.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[bindex(mode, false, i, cols)] * bv[bindex(mode, true, i, cols)];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib, mode, cols](Tape& t, std::size_t o) {
    const std::vector<double> go = t.grad(o);
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    if (t.needs_grad(ia)) {
      auto& ga = t.grad(ia);
      for (std::size_t i = 0; i < go.size(); ++i)
        ga[bindex(mode, false, i, cols)] += go[i] * B[bindex(mode, true, i, cols)];
    }
    if (t.needs_grad(ib)) {
      auto& gb = t.grad(ib);
      for (std::size_t i = 0; i < go.size(); ++i)
        gb[bindex(mode, true, i, cols)] += go[i] * A[bindex(mode, false, i, cols)];
    }
  });
}

Var select_rows(const std::vector<bool>& take_first, Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape() || take_first.size() != av.rows()) {
    throw DimensionError("select_rows: shapes " + shape_to_string(av.shape()) + ", " + shape_to_string(bv.shape()) +
                         " with " + std::to_string(take_first.size()) + " selectors");
  }
  const std::size_t c = av.cols();
  Tensor out(av.shape());
  for (std::size_t r = 0; r < take_first.size(); ++r) {
    const Tensor& src = take_first[r] ? av : bv;
    std::copy_n(src.data().data() + r * c, c, &out[r * c]);
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib, c, take_first](Tape& t, std::size_t o) {
    const std::vector<double> go = t.grad(o);
    for (std::size_t r = 0; r < take_first.size(); ++r) {
      const std::size_t dst = take_first[r] ? ia : ib;
      if (!t.needs_grad(dst)) continue;
      auto& g = t.grad(dst);
      for (std::size_t k = 0; k < c; ++k) g[r * c + k] += go[r * c + k];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  out.set_requires_grad(false);
  for (double& x : out.values()) x *= factor;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, factor](Tape& t, std::size_t o) {
    const std::vector<double>& go = t.grad(o);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += factor * go[i];
  });
}

Var concat_last(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_last: no inputs");
  std::vector<std::size_t> lead = parts[0].shape();
  lead.pop_back();
  std::size_t total = 0;
  std::vector<std::size_t> widths, ids;
  for (const Var& p : parts) {
    std::vector<std::size_t> s = p.shape();
    const std::size_t w = s.back();
    s.pop_back();
    if (s != lead) throw DimensionError("concat_last: leading dimensions differ at " + shape_to_string(p.shape()));
    widths.push_back(w);
    ids.push_back(p.id());
    total += w;
  }
  std::vector<std::size_t> shape = lead;
  shape.push_back(total);
  Tensor out(shape);
  const std::size_t rows = out.rows();
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < widths[k]; ++c) out[r * total + offset + c] = pv[r * widths[k] + c];
    offset += widths[k];
  }
  return parts[0].tape().record(std::move(out), ids, [ids, widths, rows, total](Tape& t, std::size_t o) {
    const std::vector<double>& go = t.grad(o);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.needs_grad(ids[k])) {
        auto& g = t.grad(ids[k]);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < widths[k]; ++c) g[r * widths[k] + c] += go[r * total + offset + c];
      }
      offset += widths[k];
    }
  });
}

Var slice_last(Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  const std::size_t cols = av.cols();
  if (begin >= end || end > cols) {
    throw DimensionError("slice_last: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for shape " + shape_to_string(av.shape()));
  }
  std::vector<std::size_t> shape = av.shape();
  const std::size_t w = end - begin;
  shape.back() = w;
  Tensor out(shape);
  const std::size_t rows = av.rows();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] = av[r * cols + begin + c];
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, rows, cols, begin, w](Tape& t, std::size_t o) {
    const std::vector<double>& go = t.grad(o);
    auto& ga = t.grad(ia);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) ga[r * cols + begin + c] += go[r * w + c];
  });
}

Var gelu(Var a) {
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double x = av[i];
    out[i] = 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia](Tape& t, std::size_t o) {
    const std::vector<double>& go = t.grad(o);
    const Tensor& X = t.value(ia);
    auto& ga = t.grad(ia);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < go.size(); ++i) {
      const double x = X[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
      ga[i] += go[i] * (cdf + x * pdf);
    }
  });
}

Var relu(Var a) {
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia](Tape& t, std::size_t o) {
    const std::vector<double>& go = t.grad(o);
    const Tensor& X = t.value(ia);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < go.size(); ++i)
      if (X[i] > 0.0) ga[i] += go[i];
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double x : a.value().values()) s += x;
  const std::size_t ia = a.id();
  return a.tape().record(Tensor::scalar(s), {ia}, [ia](Tape& t, std::size_t o) {
    const double g = t.grad(o)[0];
    for (double& x : t.grad(ia)) x += g;
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  double s = 0.0;
  for (double x : a.value().values()) s += x;
  const std::size_t ia = a.id();
  return a.tape().record(Tensor::scalar(s / n), {ia}, [ia, n](Tape& t, std::size_t o) {
    const double g = t.grad(o)[0] / n;
    for (double& x : t.grad(ia)) x += g;
  });
}

Var softmax(Var a, std::size_t axis) {
  const Tensor& av = a.value();
  if (axis >= av.rank()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for shape " + shape_to_string(av.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= av.dim(d);
  for (std::size_t d = axis + 1; d < av.rank(); ++d) inner *= av.dim(d);
  const std::size_t len = av.dim(axis);
  Tensor out(av.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = av[base];
      for (std::size_t k = 1; k < len; ++k) mx = std::max(mx, av[base + k * inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        const double e = std::exp(av[base + k * inner] - mx);
        out[base + k * inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < len; ++k) out[base + k * inner] /= z;
    }
  }
  const std::size_t ia = a.id();
  const std::size_t self = a.tape().size();
  return a.tape().record(std::move(out), {ia}, [ia, self, outer, inner, len](Tape& t, std::size_t o) {
    const std::vector<double>& go = t.grad(o);
    const Tensor& Y = t.value(self);
    auto& ga = t.grad(ia);
    for (std::size_t ou = 0; ou < outer; ++ou) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = ou * len * inner + in;
        double dot = 0.0;
        for (std::size_t k = 0; k < len; ++k) dot += go[base + k * inner] * Y[base + k * inner];
        for (std::size_t k = 0; k < len; ++k) {
          const std::size_t idx = base + k * inner;
          ga[idx] += Y[idx] * (go[idx] - dot);
        }
      }
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double epsilon) {
  const Tensor& xv = x.value();
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  const std::size_t c = xv.cols();
  if (gv.shape() != std::vector<std::size_t>{c} || bv.shape() != std::vector<std::size_t>{c}) {
    throw DimensionError("layer_norm: gain/bias shapes " + shape_to_string(gv.shape()) + ", " +
                         shape_to_string(bv.shape()) + " do not match last axis of " + shape_to_string(xv.shape()));
  }
  if (!(epsilon > 0.0)) throw ContractError("layer_norm: epsilon must be positive");
  const std::size_t rows = xv.rows();
  Tensor out(xv.shape());
  std::vector<double> xhat(xv.size()), rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data().data() + r * c;
    double mu = 0.0;
    for (std::size_t k = 0; k < c; ++k) mu += row[k];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t k = 0; k < c; ++k) var += (row[k] - mu) * (row[k] - mu);
    var /= static_cast<double>(c);
    rstd[r] = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t k = 0; k < c; ++k) {
      xhat[r * c + k] = (row[k] - mu) * rstd[r];
      out[r * c + k] = gv[k] * xhat[r * c + k] + bv[k];
    }
  }
  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  return x.tape().record(
      std::move(out), {ix, ig, ib},
      [ix, ig, ib, rows, c, xhat = std::move(xhat), rstd = std::move(rstd)](Tape& t, std::size_t o) {
        const std::vector<double>& go = t.grad(o);
        const Tensor& G = t.value(ig);
        if (t.needs_grad(ig)) {
          auto& gg = t.grad(ig);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < c; ++k) gg[k] += go[r * c + k] * xhat[r * c + k];
        }
        if (t.needs_grad(ib)) {
          auto& gb = t.grad(ib);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < c; ++k) gb[k] += go[r * c + k];
        }
        if (t.needs_grad(ix)) {
          auto& gx = t.grad(ix);
          const double inv_c = 1.0 / static_cast<double>(c);
          for (std::size_t r = 0; r < rows; ++r) {
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t k = 0; k < c; ++k) {
              const double d = go[r * c + k] * G[k];
              m1 += d;
              m2 += d * xhat[r * c + k];
            }
            m1 *= inv_c;
            m2 *= inv_c;
            for (std::size_t k = 0; k < c; ++k) {
              const double d = go[r * c + k] * G[k];
              gx[r * c + k] += rstd[r] * (d - m1 - xhat[r * c + k] * m2);
            }
          }
        }
      });
}

Var cross_entropy(Var logits, std::span<const std::size_t> targets) {
  const Tensor& lv = logits.value();
  require_rank2(lv, "cross_entropy");
  const std::size_t b = lv.dim(0), k = lv.dim(1);
  if (targets.size() != b) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " + std::to_string(b) +
                         " rows");
  }
  for (std::size_t i = 0; i < b; ++i) {
    if (targets[i] >= k) {
      throw IndexError("cross_entropy: target " + std::to_string(targets[i]) + " at row " + std::to_string(i) +
                       " outside [0, " + std::to_string(k) + ")");
    }
  }
  std::vector<double> probs(b * k);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double* row = lv.data().data() + i * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      probs[i * k + j] = std::exp(row[j] - mx);
      z += probs[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] /= z;
    total += (mx + std::log(z)) - row[targets[i]];
  }
  std::vector<std::size_t> tg(targets.begin(), targets.end());
  const std::size_t il = logits.id();
  return logits.tape().record(Tensor::scalar(total / static_cast<double>(b)), {il},
                              [il, b, k, tg = std::move(tg), probs = std::move(probs)](Tape& t, std::size_t o) {
                                const double g = t.grad(o)[0] / static_cast<double>(b);
                                auto& gl = t.grad(il);
                                for (std::size_t i = 0; i < b; ++i) {
                                  for (std::size_t j = 0; j < k; ++j) {
                                    const double onehot = (j == tg[i]) ? 1.0 : 0.0;
                                    gl[i * k + j] += g * (probs[i * k + j] - onehot);
                                  }
                                }
                              });
}

Var attention(Var q, Var k, Var v, double scale_factor) {
  if (q.value().cols() != k.value().cols()) {
    throw DimensionError("attention: query " + shape_to_string(q.shape()) + " and key " + shape_to_string(k.shape()) +
                         " widths differ");
  }
  if (k.value().rows() != v.value().rows()) {
    throw DimensionError("attention: key " + shape_to_string(k.shape()) + " and value " +
                         shape_to_string(v.shape()) + " row counts differ");
  }
  Var scores = scale(matmul(q, transpose(k)), scale_factor);
  return matmul(softmax(scores, 1), v);
}

Var detach(Var a) { return a.tape().constant(a.value()); }

}  // namespace dnt
