#pragma once

#include <optional>
#include <string>
#include <vector>

#include "puremkt/equilibrium.hpp"
#include "puremkt/market.hpp"
#include "puremkt/spending_forest.hpp"

namespace puremkt {

/// Spending forest with every tree hung from its lowest-index agent.
/// Isolated goods belong to no tree and have neither parent nor root entry.
struct RootedForest {
  std::vector<std::optional<NodeId>> parent;
  /// Children of each node, ascending.
  std::vector<std::vector<NodeId>> children;
  std::vector<NodeId> roots;
};

/// Throws NotAForest when the graph has a cycle.
RootedForest root_forest(const SpendingGraph& graph);

/// Evidence that an agent's budget moved by at most one good's price.
struct BudgetWitness {
  enum class Kind {
    /// e'_i < e_i: good not in x'_i with x_ig > 0 and e_i <= e'_i + p_g.
    kDeficit,
    /// e'_i > e_i: good in x'_i with e'_i <= e_i + p_g.
    kSurplus,
  };
  AgentIndex agent = 0;
  Kind kind = Kind::kDeficit;
  std::optional<GoodIndex> good;
};

struct RoundingResult {
  IntegralAllocation alloc;
  std::vector<double> budgets_new;
  PriceVector prices;
  double perturbation_inf = 0.0;  // max_i |e'_i - e_i|
  double price_inf = 0.0;         // max_j p_j
  double budget_sum_delta = 0.0;  // |sum e' - sum e|
  std::vector<BudgetWitness> witnesses;
  /// Outer-loop iterations (agents processed as roots).
  std::size_t rounds = 0;
};

/// Rounds an equilibrium with a forest spending graph to an integral
/// equilibrium of the market with budgets e'. Throws NotAnEquilibrium or
/// NotAForest on bad input.
RoundingResult round_to_pure(const Market& market, const FractionalAllocation& alloc,
                             const PriceVector& prices, const ToleranceConfig& tol = {});

struct CertificationReport {
  bool pass = false;
  bool complete = false;
  /// e'_i equals the price of x'_i.
  bool budgets_consistent = false;
  double budget_mismatch = 0.0;
  bool perturbation_ok = false;
  double perturbation_inf = 0.0;
  double price_inf = 0.0;
  bool budget_sum_ok = false;
  double budget_sum_delta = 0.0;
  EquilibriumReport equilibrium;
  /// An equilibrium allocation is fractionally Pareto efficient.
  bool fpo = false;
  bool witnesses_ok = false;
  std::vector<std::string> failures;
};

/// Independent audit of a rounding result against the original market.
CertificationReport certify_rounding(const Market& market, const RoundingResult& result,
                                     const ToleranceConfig& tol = {});

}  // namespace puremkt
