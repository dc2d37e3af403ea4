#pragma once

#include <vector>

#include "dnt/tensor.hpp"

namespace dnt {

struct Assignment {
  std::vector<int> mapping;  // mapping[row] = column, or -1 if the row is unassigned
  double total_cost = 0.0;
};

/// Minimum-cost assignment of rows to columns for an m x n cost matrix.
///
/// Exactly min(m, n) rows are assigned. Among all optimal assignments the
/// one with the lexicographically smallest mapping is returned, where an
/// unassigned row (-1) orders after every column. Throws ValueError on a
/// non-finite entry.
Assignment hungarian(const Tensor& cost);

}  // namespace dnt
