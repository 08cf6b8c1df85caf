#include "puremkt/fairness.hpp"

#include <string>

#include "puremkt/errors.hpp"

namespace puremkt {

namespace {

// Highest-valued good for `agent` among goods whose owner satisfies `pick`;
// ties resolve to the lowest index.
template <typename Pred>
std::optional<GoodIndex> best_good(const Market& market, AgentIndex agent,
                                   const IntegralAllocation& alloc, Pred pick) {
  std::optional<GoodIndex> best;
  for (GoodIndex j = 0; j < alloc.n_goods(); ++j) {
    if (!pick(alloc.owner[j])) continue;
    if (!best || market.value(agent, j) > market.value(agent, *best)) best = j;
  }
  return best;
}

// v_agent of the goods owned by `holder`, with `extra` added and `dropped`
// removed, summed in index order.
double owned_value(const Market& market, AgentIndex agent, const IntegralAllocation& alloc,
                   AgentIndex holder, std::optional<GoodIndex> extra,
                   std::optional<GoodIndex> dropped) {
  double total = 0.0;
  for (GoodIndex j = 0; j < alloc.n_goods(); ++j) {
    const bool held = alloc.owner[j] && *alloc.owner[j] == holder;
    if ((held || extra == j) && dropped != j) total += market.value(agent, j);
  }
  return total;
}

}  // namespace

FairnessProfile fairness_profile(const Market& market, const IntegralAllocation& alloc) {
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();
  if (alloc.n_goods() != m) {
    throw DimensionMismatch("allocation covers " + std::to_string(alloc.n_goods()) +
                            " goods, market has " + std::to_string(m));
  }
  for (const auto& o : alloc.owner) {
    if (o && *o >= n) throw IndexOutOfRange("owner " + std::to_string(*o) + " is not an agent");
  }

  // value[i][k] = v_i(x_k)
  std::vector<std::vector<double>> value(n, std::vector<double>(n, 0.0));
  for (AgentIndex i = 0; i < n; ++i) {
    for (GoodIndex j = 0; j < m; ++j) {
      if (alloc.owner[j]) value[i][*alloc.owner[j]] += market.value(i, j);
    }
  }

  FairnessProfile profile;
  for (AgentIndex i = 0; i < n; ++i) {
    const auto outside = best_good(market, i, alloc, [i](const std::optional<AgentIndex>& o) {
      return !o || *o != i;
    });

    double grand = 0.0;
    for (GoodIndex j = 0; j < m; ++j) grand += market.value(i, j);
    ProportionalityWitness pw;
    pw.agent = i;
    pw.own_value = value[i][i];
    pw.grand_value = grand;
    pw.added = outside;
    pw.prop = static_cast<double>(n) * pw.own_value >= grand;
    pw.prop1 = pw.prop || static_cast<double>(n) * owned_value(market, i, alloc, i, outside,
                                                               std::nullopt) >= grand;
    profile.prop = profile.prop && pw.prop;
    profile.prop1 = profile.prop1 && pw.prop1;
    profile.agents.push_back(pw);

    for (AgentIndex k = 0; k < n; ++k) {
      if (k == i) continue;
      PairWitness w;
      w.agent = i;
      w.other = k;
      w.own_value = value[i][i];
      w.other_value = value[i][k];
      w.removed = best_good(market, i, alloc, [k](const std::optional<AgentIndex>& o) {
        return o && *o == k;
      });
      w.added = outside;
      w.ef = w.own_value >= w.other_value;
      if (!w.removed) {
        // Empty envied bundle.
        w.ef1 = w.ef11 = true;
      } else {
        const double reduced = owned_value(market, i, alloc, k, std::nullopt, w.removed);
        w.ef1 = w.ef || w.own_value >= reduced;
        w.ef11 = w.ef1 ||
                 owned_value(market, i, alloc, i, outside, std::nullopt) >= reduced;
      }
      profile.ef = profile.ef && w.ef;
      profile.ef1 = profile.ef1 && w.ef1;
      profile.ef11 = profile.ef11 && w.ef11;
      profile.pairs.push_back(w);
    }
  }
  return profile;
}

}  // namespace puremkt
