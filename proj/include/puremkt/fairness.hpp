#pragma once

#include <optional>
#include <vector>

#include "puremkt/market.hpp"

namespace puremkt {

/// Evidence for one ordered pair (envious agent, envied agent).
struct PairWitness {
  AgentIndex agent = 0;
  AgentIndex other = 0;
  double own_value = 0.0;    // v_i(x_i)
  double other_value = 0.0;  // v_i(x_k)
  /// Good of x_k that i values most; removed for EF1 / EF11.
  std::optional<GoodIndex> removed;
  /// Good outside x_i that i values most; added for EF11.
  std::optional<GoodIndex> added;
  bool ef = false;
  bool ef1 = false;
  bool ef11 = false;
};

struct ProportionalityWitness {
  AgentIndex agent = 0;
  double own_value = 0.0;
  double grand_value = 0.0;  // v_i([m]); the share is grand_value / n
  std::optional<GoodIndex> added;
  bool prop = false;
  bool prop1 = false;
};

struct FairnessProfile {
  bool ef = true;
  bool ef1 = true;
  bool ef11 = true;
  bool prop = true;
  bool prop1 = true;
  /// All ordered pairs i != k, row-major in (i, k).
  std::vector<PairWitness> pairs;
  std::vector<ProportionalityWitness> agents;
};

/// Exhaustive EF / EF1 / EF11 / Prop / Prop1 evaluation of an integral
/// allocation. Budgets are ignored. Comparisons are exact.
FairnessProfile fairness_profile(const Market& market, const IntegralAllocation& alloc);

}  // namespace puremkt
