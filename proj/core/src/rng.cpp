#include "dnt/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace dnt {

std::size_t Rng::uniform_index(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / bound * bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

double Rng::uniform_open01() {
  const std::uint64_t x = engine_() >> 11;
  return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform_open01();
  const double u2 = uniform_open01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i-- > 1;) {
    std::swap(perm[i], perm[uniform_index(i + 1)]);
  }
  return perm;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag, std::uint64_t index) {
  return mix64(mix64(mix64(root) ^ tag) + index);
}

}  // namespace dnt
