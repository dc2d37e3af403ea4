#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "dnt/error.hpp"
#include "dnt/hungarian.hpp"
#include "dnt/rng.hpp"

using namespace dnt;

namespace {

double brute_force(const Tensor& c) {
  const std::size_t n = c.dim(0);
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += c.at(i, p[i]);
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

double cost_of(const Tensor& c, const Assignment& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.mapping.size(); ++i)
    if (a.mapping[i] >= 0) s += c.at(i, static_cast<std::size_t>(a.mapping[i]));
  return s;
}

}  // namespace

TEST(Hungarian, Examples) {
  Assignment a = hungarian(Tensor::matrix({{0}}));
  EXPECT_EQ(a.mapping, std::vector<int>{0});
  EXPECT_EQ(a.total_cost, 0.0);

  a = hungarian(Tensor::matrix({{1, 2}, {2, 1}}));
  EXPECT_EQ(a.mapping, (std::vector<int>{0, 1}));
  EXPECT_EQ(a.total_cost, 2.0);

  a = hungarian(Tensor::matrix({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}}));
  EXPECT_EQ(a.mapping, (std::vector<int>{1, 0, 2}));
  EXPECT_EQ(a.total_cost, 5.0);
}

TEST(Hungarian, MatchesBruteForce) {
  Rng rng(2024);
  for (std::size_t n = 2; n <= 7; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      Tensor c({n, n});
      // Integer costs make exact equality meaningful and produce ties.
      for (double& x : c.values()) x = static_cast<double>(rng.uniform_index(10));
      const Assignment a = hungarian(c);
      ASSERT_EQ(a.total_cost, brute_force(c)) << "n=" << n << " trial=" << trial;
      ASSERT_EQ(cost_of(c, a), a.total_cost);
      std::vector<int> sorted = a.mapping;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(sorted[i], static_cast<int>(i));
    }
  }
}

TEST(Hungarian, TieBreakIsLexicographic) {
  EXPECT_EQ(hungarian(Tensor({3, 3}, 0.0)).mapping, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(hungarian(Tensor({3, 2}, 0.0)).mapping, (std::vector<int>{0, 1, -1}));
  EXPECT_EQ(hungarian(Tensor({2, 3}, 0.0)).mapping, (std::vector<int>{0, 1}));
  // Two optima, [0,1] and [1,0]; the first wins.
  EXPECT_EQ(hungarian(Tensor::matrix({{1, 1}, {1, 1}})).mapping, (std::vector<int>{0, 1}));
}

TEST(Hungarian, Rectangular) {
  const Tensor tall = Tensor::matrix({{5, 9}, {1, 8}, {7, 2}});
  Assignment a = hungarian(tall);
  EXPECT_EQ(a.mapping, (std::vector<int>{-1, 0, 1}));
  EXPECT_EQ(a.total_cost, 3.0);
  const Tensor wide = Tensor::matrix({{5, 1, 7}, {9, 8, 2}});
  a = hungarian(wide);
  EXPECT_EQ(a.mapping, (std::vector<int>{1, 2}));
  EXPECT_EQ(a.total_cost, 3.0);
}

TEST(Hungarian, InvariantToRowAndColumnConstants) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(5);
    Tensor c({n, n});
    for (double& x : c.values()) x = rng.uniform(0.0, 1.0);
    Tensor shifted = c;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) shifted.at(i, j) += 0.5 * static_cast<double>(i) + 0.25 * static_cast<double>(j);
    EXPECT_EQ(hungarian(c).mapping, hungarian(shifted).mapping);
  }
}

TEST(Hungarian, RejectsNonFinite) {
  EXPECT_THROW(hungarian(Tensor::matrix({{0, std::nan("")}, {1, 1}})), ValueError);
  EXPECT_THROW(hungarian(Tensor::matrix({{0, std::numeric_limits<double>::infinity()}})), ValueError);
}
