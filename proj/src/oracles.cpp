#include "puremkt/oracles.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "puremkt/errors.hpp"

namespace puremkt {

void PartitionInstance::validate() const {
  if (values.empty()) throw InvalidInput("partition instance needs at least one value");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] < 1) throw InvalidInput("partition value " + std::to_string(k) + " must be >= 1");
  }
}

std::int64_t PartitionInstance::total() const {
  std::int64_t sum = 0;
  for (auto v : values) sum += v;
  return sum;
}

Market partition_market(const PartitionInstance& instance) {
  instance.validate();
  const std::size_t m = instance.values.size();
  Matrix v(2, m);
  for (GoodIndex j = 0; j < m; ++j) {
    v(0, j) = v(1, j) = static_cast<double>(instance.values[j]);
  }
  const double half = static_cast<double>(instance.total()) / 2.0;
  return Market(std::move(v), {half, half});
}

PurityVerdict purity_oracle_partition_family(const PartitionInstance& instance,
                                             std::size_t max_goods) {
  instance.validate();
  const std::size_t m = instance.values.size();
  if (m > max_goods) {
    throw TooLarge("partition oracle limited to " + std::to_string(max_goods) + " goods, got " +
                   std::to_string(m));
  }
  PurityVerdict verdict;
  const std::int64_t total = instance.total();
  if (total % 2 != 0) return verdict;

  const std::uint64_t masks = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    std::int64_t sum = 0;
    for (GoodIndex j = 0; j < m; ++j) {
      if (mask >> j & 1U) sum += instance.values[j];
    }
    if (2 * sum != total) continue;

    PartitionWitness w;
    IntegralAllocation alloc(m);
    std::vector<double> prices(m);
    for (GoodIndex j = 0; j < m; ++j) {
      const AgentIndex holder = (mask >> j & 1U) ? 0 : 1;
      (holder == 0 ? w.first : w.second).push_back(j);
      alloc.owner[j] = holder;
      prices[j] = static_cast<double>(instance.values[j]);
    }
    const Market market = partition_market(instance);
    PriceVector p(std::move(prices));
    // Integer data: the equilibrium holds with zero tolerance.
    auto report = check_equilibrium(market, alloc.to_fractional(2), p, ToleranceConfig{0.0, 0.0, 0.0});
    if (!report.is_equilibrium) {
      throw std::logic_error("partition witness failed the exact equilibrium check");
    }
    verdict.is_pure = true;
    verdict.witness = std::move(w);
    verdict.alloc = std::move(alloc);
    verdict.prices = std::move(p);
    verdict.report = std::move(report);
    return verdict;
  }
  return verdict;
}

DominationResult brute_force_integral_po(const Market& market, const IntegralAllocation& alloc,
                                         std::uint64_t guard) {
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();
  if (alloc.n_goods() != m) throw DimensionMismatch("allocation does not match market");

  std::uint64_t space = 1;
  for (std::size_t j = 0; j < m; ++j) {
    if (space > guard / n) {
      throw TooLarge("n^m exceeds the enumeration guard of " + std::to_string(guard));
    }
    space *= n;
  }

  std::vector<double> base(n, 0.0);
  for (GoodIndex j = 0; j < m; ++j) {
    if (alloc.owner[j]) base[*alloc.owner[j]] += market.value(*alloc.owner[j], j);
  }

  // Odometer with the last good turning fastest: lexicographic order in
  // (owner[0], owner[1], ...).
  std::vector<AgentIndex> digits(m, 0);
  std::vector<double> value(n);
  for (std::uint64_t step = 0; step < space; ++step) {
    std::fill(value.begin(), value.end(), 0.0);
    for (GoodIndex j = 0; j < m; ++j) value[digits[j]] += market.value(digits[j], j);
    bool weakly = true;
    bool strictly = false;
    for (AgentIndex i = 0; i < n && weakly; ++i) {
      weakly = value[i] >= base[i];
      strictly = strictly || value[i] > base[i];
    }
    if (weakly && strictly) {
      DominationResult r;
      r.dominated = true;
      IntegralAllocation y(m);
      for (GoodIndex j = 0; j < m; ++j) y.owner[j] = digits[j];
      r.dominator = std::move(y);
      return r;
    }
    for (std::size_t pos = m; pos-- > 0;) {
      if (++digits[pos] < n) break;
      digits[pos] = 0;
    }
  }
  return {};
}

Market comparative_instance(std::size_t n, double eps) {
  if (n < 1) throw InvalidInput("comparative instance needs n >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("eps must lie in (0,1)");
  const std::size_t agents = 2 * n;
  const std::size_t goods = 4 * n - 1;
  Matrix v(agents, goods, 0.0);
  for (AgentIndex i = 0; i < agents; ++i) {
    for (GoodIndex j = 0; j < goods; ++j) {
      const bool first_block = j < 2 * n;
      if (i < n) {
        v(i, j) = first_block ? static_cast<double>(n) : 0.0;
      } else {
        v(i, j) = first_block ? 1.0 - eps : 1.0;
      }
    }
  }
  return Market(std::move(v), std::vector<double>(agents, 1.0));
}

PriceVector comparative_expected_prices(std::size_t n) {
  if (n < 1) throw InvalidInput("comparative prices need n >= 1");
  std::vector<double> p(2 * n, 0.5);
  p.resize(4 * n - 1, static_cast<double>(n) / static_cast<double>(2 * n - 1));
  return PriceVector(std::move(p));
}

PriceVector comparative_equilibrium_prices(std::size_t n, double eps) {
  if (n < 1) throw InvalidInput("comparative prices need n >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("eps must lie in (0,1)");
  if (eps * static_cast<double>(2 * n) >= 1.0) return comparative_expected_prices(n);
  // Last agents indifferent between blocks: (1-eps)/a = 1/b, with total
  // spend 2n*a + (2n-1)*b = 2n.
  const double first = static_cast<double>(2 * n) /
                       (static_cast<double>(2 * n) + static_cast<double>(2 * n - 1) / (1.0 - eps));
  const double second = first / (1.0 - eps);
  std::vector<double> p(2 * n, first);
  p.resize(4 * n - 1, second);
  return PriceVector(std::move(p));
}

}  // namespace puremkt
