#include "puremkt/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "puremkt/errors.hpp"

namespace puremkt {

Market::Market(Matrix valuations, std::vector<double> budgets)
    : valuations_(std::move(valuations)), budgets_(std::move(budgets)) {
  const std::size_t n = valuations_.rows();
  const std::size_t m = valuations_.cols();
  if (n == 0) throw InvalidInput("market needs at least one agent");
  if (m == 0) throw InvalidInput("market needs at least one good");
  if (budgets_.size() != n) {
    throw DimensionMismatch("budget vector has " + std::to_string(budgets_.size()) +
                            " entries for " + std::to_string(n) + " agents");
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool any_positive = false;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = valuations_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidInput("valuation (" + std::to_string(i) + "," + std::to_string(j) +
                           ") must be finite and nonnegative");
      }
      any_positive = any_positive || v > 0.0;
    }
    if (!any_positive) {
      throw InvalidInput("agent " + std::to_string(i) + " values every good at zero");
    }
    if (!std::isfinite(budgets_[i]) || budgets_[i] <= 0.0) {
      throw InvalidInput("budget of agent " + std::to_string(i) + " must be positive");
    }
  }
}

double Market::total_budget() const {
  return std::accumulate(budgets_.begin(), budgets_.end(), 0.0);
}

Market Market::with_budgets(std::vector<double> budgets) const {
  return Market(valuations_, std::move(budgets));
}

void FractionalAllocation::validate(double tol) const {
  for (std::size_t j = 0; j < n_goods(); ++j) {
    double column = 0.0;
    for (std::size_t i = 0; i < n_agents(); ++i) {
      const double s = shares(i, j);
      if (!(s >= 0.0 && s <= 1.0)) {
        throw InvalidInput("share (" + std::to_string(i) + "," + std::to_string(j) +
                           ") outside [0,1]");
      }
      column += s;
    }
    if (column > 1.0 + tol) {
      throw InvalidInput("good " + std::to_string(j) + " allocated " + std::to_string(column) +
                         " > 1");
    }
  }
}

IntegralAllocation IntegralAllocation::from_bundles(
    std::size_t n_goods, const std::vector<std::vector<GoodIndex>>& bundles) {
  IntegralAllocation out(n_goods);
  for (AgentIndex i = 0; i < bundles.size(); ++i) {
    for (GoodIndex j : bundles[i]) {
      if (j >= n_goods) throw IndexOutOfRange("good " + std::to_string(j) + " out of range");
      if (out.owner[j]) throw InvalidInput("good " + std::to_string(j) + " has two owners");
      out.owner[j] = i;
    }
  }
  return out;
}

std::vector<GoodIndex> IntegralAllocation::bundle(AgentIndex i) const {
  std::vector<GoodIndex> out;
  for (GoodIndex j = 0; j < owner.size(); ++j) {
    if (owner[j] && *owner[j] == i) out.push_back(j);
  }
  return out;
}

bool IntegralAllocation::complete() const {
  return std::all_of(owner.begin(), owner.end(), [](const auto& o) { return o.has_value(); });
}

FractionalAllocation IntegralAllocation::to_fractional(std::size_t n_agents) const {
  FractionalAllocation out(n_agents, owner.size());
  for (GoodIndex j = 0; j < owner.size(); ++j) {
    if (!owner[j]) continue;
    if (*owner[j] >= n_agents) {
      throw IndexOutOfRange("owner of good " + std::to_string(j) + " is not an agent");
    }
    out(*owner[j], j) = 1.0;
  }
  return out;
}

double PriceVector::max_norm() const {
  double out = 0.0;
  for (double p : prices) out = std::max(out, std::abs(p));
  return out;
}

double PriceVector::sum() const { return std::accumulate(prices.begin(), prices.end(), 0.0); }

}  // namespace puremkt
