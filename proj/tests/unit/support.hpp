#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "puremkt/market.hpp"

namespace testing {

using puremkt::IntegralAllocation;
using puremkt::Market;
using puremkt::Matrix;

inline Market make_market(const std::vector<std::vector<double>>& rows,
                          std::vector<double> budgets) {
  return Market(Matrix::from_rows(rows), std::move(budgets));
}

// Small-integer valuations (some zeros) with every agent valuing something.
inline Market random_market(std::mt19937_64& rng, std::size_t n, std::size_t m,
                            bool unit_budgets = true) {
  std::uniform_int_distribution<int> value(0, 9);
  std::uniform_real_distribution<double> budget(0.5, 2.0);
  Matrix v(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    bool positive = false;
    for (std::size_t j = 0; j < m; ++j) {
      v(i, j) = value(rng);
      positive = positive || v(i, j) > 0.0;
    }
    if (!positive) v(i, rng() % m) = 1.0;
  }
  std::vector<double> e(n, 1.0);
  if (!unit_budgets) {
    for (auto& b : e) b = budget(rng);
  }
  return Market(std::move(v), std::move(e));
}

inline IntegralAllocation random_integral(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                          bool complete) {
  IntegralAllocation out(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t pick = rng() % (complete ? n : n + 1);
    if (pick < n) out.owner[j] = pick;
  }
  return out;
}

// Strictly interior point: every share positive, every column summing to 1.
inline Matrix random_interior(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  Matrix x(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    double column = 0.0;
    for (std::size_t i = 0; i < n; ++i) column += (x(i, j) = unit(rng));
    for (std::size_t i = 0; i < n; ++i) x(i, j) /= column;
  }
  return x;
}

// Subset-sum reachability by dynamic programming, independent of the
// enumeration oracle.
inline bool has_equal_split(const std::vector<std::int64_t>& values) {
  std::int64_t total = 0;
  for (auto v : values) total += v;
  if (total % 2 != 0) return false;
  std::vector<char> reach(static_cast<std::size_t>(total / 2) + 1, 0);
  reach[0] = 1;
  for (auto v : values) {
    for (std::int64_t s = total / 2; s >= v; --s) {
      if (reach[static_cast<std::size_t>(s - v)]) reach[static_cast<std::size_t>(s)] = 1;
    }
  }
  return reach[static_cast<std::size_t>(total / 2)] != 0;
}

}  // namespace testing
