#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "puremkt/equilibrium.hpp"
#include "puremkt/market.hpp"

namespace puremkt {

/// Multiset of positive integers to be split into two equal-sum halves.
struct PartitionInstance {
  std::vector<std::int64_t> values;

  void validate() const;
  std::int64_t total() const;
};

/// Two agents with identical valuations s_j and budgets half the total.
Market partition_market(const PartitionInstance& instance);

struct PartitionWitness {
  /// Good indices held by agent 0 and agent 1.
  std::vector<GoodIndex> first;
  std::vector<GoodIndex> second;
};

struct PurityVerdict {
  bool is_pure = false;
  std::optional<PartitionWitness> witness;
  /// Integral equilibrium built from the witness (prices = values).
  std::optional<IntegralAllocation> alloc;
  std::optional<PriceVector> prices;
  std::optional<EquilibriumReport> report;
};

inline constexpr std::size_t kPartitionGuard = 24;

/// Exhaustive subset-sum search over the partition family; the first witness
/// in subset-mask order wins. Throws TooLarge beyond `max_goods`.
PurityVerdict purity_oracle_partition_family(const PartitionInstance& instance,
                                             std::size_t max_goods = kPartitionGuard);

struct DominationResult {
  bool dominated = false;
  std::optional<IntegralAllocation> dominator;
};

inline constexpr std::uint64_t kParetoGuard = 1'000'000;

/// Enumerates every complete integral allocation looking for a Pareto
/// improvement over `alloc`. Throws TooLarge when n^m exceeds `guard`.
DominationResult brute_force_integral_po(const Market& market, const IntegralAllocation& alloc,
                                         std::uint64_t guard = kParetoGuard);

/// 2n agents, 4n-1 goods, unit budgets: the first n agents value the first 2n
/// goods at n and the rest at 0; the last n value the first 2n at 1 - eps and
/// the rest at 1.
Market comparative_instance(std::size_t n, double eps);

/// Closed-form prices quoted for the comparative family: 1/2 on the first 2n
/// goods and n/(2n-1) on the remaining 2n-1. These are the equilibrium prices
/// only when eps >= 1/(2n); see comparative_equilibrium_prices.
PriceVector comparative_expected_prices(std::size_t n);

/// Exact equilibrium prices of comparative_instance(n, eps) for any eps in
/// (0,1). For eps < 1/(2n) the last n agents also buy from the first block,
/// which equalises their bang-per-buck across blocks.
PriceVector comparative_equilibrium_prices(std::size_t n, double eps);

}  // namespace puremkt
