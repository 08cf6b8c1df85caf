#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "puremkt/market.hpp"

namespace puremkt {

/// Random equal-income instances: m = goods_factor * n goods, valuations
/// drawn i.i.d. uniform from {2^(2^(k-1)) : k = 1..value_exponent_levels}.
struct GeneratorConfig {
  std::size_t n_agents = 2;
  std::size_t goods_factor = 5;
  std::uint64_t seed = 0;
  std::size_t value_exponent_levels = 5;
  std::size_t trials = 100;
  /// Agent counts swept by run_experiment.
  std::vector<std::size_t> agent_counts{2, 4, 8, 16, 32, 64};

  void validate() const;
  std::vector<double> value_set() const;
};

/// Deterministic in (seed, n_agents, trial). Budgets are all one.
Market generate_instance(const GeneratorConfig& config, std::size_t trial);

}  // namespace puremkt
