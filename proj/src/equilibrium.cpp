#include "puremkt/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "puremkt/errors.hpp"

namespace puremkt {

namespace {

void require_agent(const Market& market, AgentIndex agent) {
  if (agent >= market.n_agents()) {
    throw IndexOutOfRange("agent " + std::to_string(agent) + " out of range");
  }
}

void require_prices(const Market& market, const PriceVector& prices) {
  if (prices.size() != market.n_goods()) {
    throw DimensionMismatch("price vector has " + std::to_string(prices.size()) +
                            " entries for " + std::to_string(market.n_goods()) + " goods");
  }
}

}  // namespace

double bundle_value(const Market& market, AgentIndex agent, std::span<const GoodIndex> goods) {
  require_agent(market, agent);
  double total = 0.0;
  for (GoodIndex j : goods) {
    if (j >= market.n_goods()) throw IndexOutOfRange("good " + std::to_string(j) + " out of range");
    total += market.value(agent, j);
  }
  return total;
}

double bundle_value(const Market& market, AgentIndex agent, std::span<const double> shares) {
  require_agent(market, agent);
  if (shares.size() != market.n_goods()) {
    throw DimensionMismatch("bundle has " + std::to_string(shares.size()) + " entries for " +
                            std::to_string(market.n_goods()) + " goods");
  }
  double total = 0.0;
  for (GoodIndex j = 0; j < shares.size(); ++j) total += market.value(agent, j) * shares[j];
  return total;
}

MbbResult mbb(const Market& market, AgentIndex agent, const PriceVector& prices, double rel_tol) {
  require_agent(market, agent);
  require_prices(market, prices);
  bool any_priced = false;
  MbbResult out;
  for (GoodIndex j = 0; j < market.n_goods(); ++j) {
    const double v = market.value(agent, j);
    if (prices[j] > 0.0) {
      any_priced = true;
      out.ratio = std::max(out.ratio, v / prices[j]);
    } else if (v > 0.0) {
      throw UnboundedMBB(agent, j);
    }
  }
  if (!any_priced) throw DegeneratePrices("all prices are zero");
  const double threshold = out.ratio * (1.0 - rel_tol);
  for (GoodIndex j = 0; j < market.n_goods(); ++j) {
    if (prices[j] <= 0.0 || market.value(agent, j) / prices[j] >= threshold) {
      out.goods.push_back(j);
    }
  }
  return out;
}

double EquilibriumReport::worst_violation() const {
  return std::max({market_clearing.worst, budget_exhaustion.worst, mbb.worst});
}

EquilibriumReport check_equilibrium(const Market& market, const FractionalAllocation& alloc,
                                    const PriceVector& prices, const ToleranceConfig& tol) {
  return check_equilibrium(market, alloc, prices, market.budgets(), tol);
}

EquilibriumReport check_equilibrium(const Market& market, const FractionalAllocation& alloc,
                                    const PriceVector& prices, std::span<const double> budgets,
                                    const ToleranceConfig& tol) {
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();
  require_prices(market, prices);
  if (alloc.n_agents() != n || alloc.n_goods() != m) {
    throw DimensionMismatch("allocation is " + std::to_string(alloc.n_agents()) + "x" +
                            std::to_string(alloc.n_goods()) + ", market is " + std::to_string(n) +
                            "x" + std::to_string(m));
  }

  if (budgets.size() != n) throw DimensionMismatch("budget vector does not match agents");

  EquilibriumReport report;
  report.tolerance_used = tol;

  for (GoodIndex j = 0; j < m; ++j) {
    if (prices[j] <= tol.abs) continue;
    double column = 0.0;
    for (AgentIndex i = 0; i < n; ++i) column += alloc(i, j);
    const double gap = std::abs(1.0 - column);
    report.market_clearing.worst = std::max(report.market_clearing.worst, gap);
    if (gap > tol.abs) report.market_clearing.ok = false;
  }

  report.budget_residuals.resize(n);
  for (AgentIndex i = 0; i < n; ++i) {
    double spend = 0.0;
    for (GoodIndex j = 0; j < m; ++j) spend += alloc(i, j) * prices[j];
    const double residual = std::abs(spend - budgets[i]);
    report.budget_residuals[i] = residual;
    report.budget_exhaustion.worst = std::max(report.budget_exhaustion.worst, residual);
    if (residual > tol.abs + tol.rel * budgets[i]) report.budget_exhaustion.ok = false;
  }

  for (AgentIndex i = 0; i < n; ++i) {
    double best = 0.0;
    bool unbounded = false;
    for (GoodIndex j = 0; j < m; ++j) {
      if (prices[j] > 0.0) {
        best = std::max(best, market.value(i, j) / prices[j]);
      } else if (market.value(i, j) > 0.0) {
        unbounded = true;
      }
    }
    if (unbounded || best <= 0.0) {
      // Nothing this agent buys can be optimal.
      report.mbb.ok = false;
      report.mbb.worst = std::numeric_limits<double>::infinity();
      continue;
    }
    for (GoodIndex j = 0; j < m; ++j) {
      if (alloc(i, j) <= tol.spend || prices[j] <= 0.0) continue;
      const double gap = (best - market.value(i, j) / prices[j]) / best;
      report.mbb.worst = std::max(report.mbb.worst, gap);
      if (gap > tol.rel) report.mbb.ok = false;
    }
  }

  report.is_equilibrium =
      report.market_clearing.ok && report.budget_exhaustion.ok && report.mbb.ok;
  return report;
}

}  // namespace puremkt
