#include "puremkt/generator.hpp"

#include <cmath>
#include <random>

#include "puremkt/errors.hpp"

namespace puremkt {

void GeneratorConfig::validate() const {
  if (n_agents < 1) throw InvalidInput("generator needs at least one agent");
  if (goods_factor < 1) throw InvalidInput("goods_factor must be at least 1");
  // 2^(2^9) = 2^512 is the largest level that still fits a double.
  if (value_exponent_levels < 1 || value_exponent_levels > 10) {
    throw InvalidInput("value_exponent_levels must lie in [1, 10]");
  }
}

std::vector<double> GeneratorConfig::value_set() const {
  std::vector<double> out;
  for (std::size_t k = 1; k <= value_exponent_levels; ++k) {
    out.push_back(std::ldexp(1.0, 1 << (k - 1)));
  }
  return out;
}

Market generate_instance(const GeneratorConfig& config, std::size_t trial) {
  config.validate();
  const std::size_t n = config.n_agents;
  const std::size_t m = config.goods_factor * n;
  const auto levels = config.value_set();

  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);

  Matrix v(n, m);
  for (AgentIndex i = 0; i < n; ++i) {
    for (GoodIndex j = 0; j < m; ++j) v(i, j) = levels[pick(rng)];
  }
  return Market(std::move(v), std::vector<double>(n, 1.0));
}

}  // namespace puremkt
