#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "puremkt/matrix.hpp"

namespace puremkt {

using AgentIndex = std::size_t;
using GoodIndex = std::size_t;

/// Fisher market with additive valuations: agents, goods, a nonnegative
/// valuation matrix and positive budgets. Validated on construction.
class Market {
 public:
  Market(Matrix valuations, std::vector<double> budgets);

  std::size_t n_agents() const { return valuations_.rows(); }
  std::size_t n_goods() const { return valuations_.cols(); }

  const Matrix& valuations() const { return valuations_; }
  const std::vector<double>& budgets() const { return budgets_; }

  double value(AgentIndex i, GoodIndex j) const { return valuations_(i, j); }
  double budget(AgentIndex i) const { return budgets_[i]; }
  double total_budget() const;

  /// Same agents, goods and valuations with a different budget vector.
  Market with_budgets(std::vector<double> budgets) const;

  bool operator==(const Market&) const = default;

 private:
  Matrix valuations_;
  std::vector<double> budgets_;
};

/// Fraction of each good held by each agent; rows are agents.
struct FractionalAllocation {
  Matrix shares;

  FractionalAllocation() = default;
  explicit FractionalAllocation(Matrix s) : shares(std::move(s)) {}
  FractionalAllocation(std::size_t n_agents, std::size_t n_goods)
      : shares(n_agents, n_goods, 0.0) {}

  std::size_t n_agents() const { return shares.rows(); }
  std::size_t n_goods() const { return shares.cols(); }
  double operator()(AgentIndex i, GoodIndex j) const { return shares(i, j); }
  double& operator()(AgentIndex i, GoodIndex j) { return shares(i, j); }

  /// Throws InvalidInput if an entry leaves [0,1] or a column sums past 1 + tol.
  void validate(double tol) const;

  bool operator==(const FractionalAllocation&) const = default;
};

/// Per-good owner; std::nullopt marks an unassigned good.
struct IntegralAllocation {
  std::vector<std::optional<AgentIndex>> owner;

  IntegralAllocation() = default;
  explicit IntegralAllocation(std::size_t n_goods) : owner(n_goods) {}
  explicit IntegralAllocation(std::vector<std::optional<AgentIndex>> o) : owner(std::move(o)) {}

  /// Builds from explicit bundles; throws InvalidInput if a good appears twice.
  static IntegralAllocation from_bundles(std::size_t n_goods,
                                         const std::vector<std::vector<GoodIndex>>& bundles);

  std::size_t n_goods() const { return owner.size(); }
  std::vector<GoodIndex> bundle(AgentIndex i) const;
  bool complete() const;
  FractionalAllocation to_fractional(std::size_t n_agents) const;

  bool operator==(const IntegralAllocation&) const = default;
};

struct PriceVector {
  std::vector<double> prices;

  PriceVector() = default;
  explicit PriceVector(std::vector<double> p) : prices(std::move(p)) {}

  std::size_t size() const { return prices.size(); }
  double operator[](GoodIndex j) const { return prices[j]; }
  double& operator[](GoodIndex j) { return prices[j]; }
  double max_norm() const;
  double sum() const;

  bool operator==(const PriceVector&) const = default;
};

/// Tolerances shared by every equilibrium-condition check.
struct ToleranceConfig {
  double abs = 1e-7;
  double rel = 1e-5;
  /// Shares at or below this are treated as "not spending".
  double spend = 1e-9;
};

}  // namespace puremkt
