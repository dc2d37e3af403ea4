#include "dnt/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dnt/error.hpp"

namespace dnt {

namespace {

// Shortest augmenting path with potentials on a square matrix. Returns the
// row potentials u and column potentials v of an optimal dual solution.
void solve_duals(const std::vector<double>& a, std::size_t n, std::vector<double>& u, std::vector<double>& v) {
  const double inf = std::numeric_limits<double>::infinity();
  u.assign(n + 1, 0.0);
  v.assign(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
}

// Kuhn augmenting path restricted to rows >= first_free and unblocked columns.
bool augment(std::size_t r, const std::vector<std::vector<std::size_t>>& adj, std::vector<int>& col_owner,
             std::vector<char>& visited, const std::vector<char>& blocked) {
  for (std::size_t c : adj[r]) {
    if (blocked[c] || visited[c]) continue;
    visited[c] = 1;
    if (col_owner[c] < 0 || augment(static_cast<std::size_t>(col_owner[c]), adj, col_owner, visited, blocked)) {
      col_owner[c] = static_cast<int>(r);
      return true;
    }
  }
  return false;
}

// True if rows [from, n) have a perfect matching into unblocked columns.
bool completable(std::size_t from, std::size_t n, const std::vector<std::vector<std::size_t>>& adj,
                 const std::vector<char>& blocked) {
  std::vector<int> owner(n, -1);
  for (std::size_t r = from; r < n; ++r) {
    std::vector<char> visited(n, 0);
    if (!augment(r, adj, owner, visited, blocked)) return false;
  }
  return true;
}

}  // namespace

Assignment hungarian(const Tensor& cost) {
  if (cost.rank() != 2) throw DimensionError("hungarian: cost must be a matrix, got " + shape_to_string(cost.shape()));
  const std::size_t m = cost.dim(0), n = cost.dim(1);
  double scale = 1.0;
  for (std::size_t i = 0; i < cost.size(); ++i) {
    if (!std::isfinite(cost[i])) {
      throw ValueError("hungarian: non-finite cost at (" + std::to_string(i / n) + ", " + std::to_string(i % n) + ")");
    }
    scale = std::max(scale, std::abs(cost[i]));
  }

  // Pad to square with zero-cost dummy rows/columns.
  const std::size_t s = std::max(m, n);
  std::vector<double> a(s * s, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * s + j] = cost.at(i, j);

  std::vector<double> u, v;
  solve_duals(a, s, u, v);

  // Every optimal assignment lies in the equality subgraph of an optimal
  // dual; pick its lexicographically smallest perfect matching row by row.
  const double tol = 1e-9 * scale * static_cast<double>(s);
  std::vector<std::vector<std::size_t>> adj(s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j)
      if (std::abs(a[i * s + j] - u[i + 1] - v[j + 1]) <= tol) adj[i].push_back(j);

  std::vector<char> blocked(s, 0);
  std::vector<std::size_t> chosen(s, 0);
  for (std::size_t r = 0; r < s; ++r) {
    bool placed = false;
    for (std::size_t c : adj[r]) {
      if (blocked[c]) continue;
      blocked[c] = 1;
      if (completable(r + 1, s, adj, blocked)) {
        chosen[r] = c;
        placed = true;
        break;
      }
      blocked[c] = 0;
    }
    if (!placed) throw ValueError("hungarian: equality subgraph has no perfect matching (ill-conditioned costs)");
  }

  Assignment out;
  out.mapping.assign(m, -1);
  for (std::size_t r = 0; r < m; ++r) {
    if (chosen[r] < n) {
      out.mapping[r] = static_cast<int>(chosen[r]);
      out.total_cost += cost.at(r, chosen[r]);
    }
  }
  return out;
}

}  // namespace dnt
