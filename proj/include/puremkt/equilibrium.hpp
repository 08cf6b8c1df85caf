#pragma once

#include <span>
#include <vector>

#include "puremkt/market.hpp"

namespace puremkt {

/// Additive value of a set of goods for one agent.
double bundle_value(const Market& market, AgentIndex agent, std::span<const GoodIndex> goods);

/// Additive value of a fractional bundle (one share per good).
double bundle_value(const Market& market, AgentIndex agent, std::span<const double> shares);

struct MbbResult {
  double ratio = 0.0;
  std::vector<GoodIndex> goods;
};

/// Maximum bang-per-buck ratio and set of one agent. Zero-priced goods are
/// in every MBB set (they must be valued zero, else UnboundedMBB).
MbbResult mbb(const Market& market, AgentIndex agent, const PriceVector& prices,
              double rel_tol = 0.0);

struct ConditionCheck {
  bool ok = true;
  double worst = 0.0;
};

struct EquilibriumReport {
  /// worst |1 - sum_i x_ij| over positively priced goods
  ConditionCheck market_clearing;
  /// worst |x_i . p - e_i|
  ConditionCheck budget_exhaustion;
  std::vector<double> budget_residuals;
  /// worst relative MBB gap over spent-on goods; infinite if an agent values a
  /// zero-priced good
  ConditionCheck mbb;
  bool is_equilibrium = false;
  ToleranceConfig tolerance_used;

  double worst_violation() const;
};

/// Evaluates the three equilibrium conditions. Violations are reported, never
/// thrown; only inconsistent dimensions raise.
EquilibriumReport check_equilibrium(const Market& market, const FractionalAllocation& alloc,
                                    const PriceVector& prices, const ToleranceConfig& tol = {});

/// Same, against an explicit budget vector (entries may be zero, as in the
/// budgets produced by rounding).
EquilibriumReport check_equilibrium(const Market& market, const FractionalAllocation& alloc,
                                    const PriceVector& prices, std::span<const double> budgets,
                                    const ToleranceConfig& tol = {});

}  // namespace puremkt
