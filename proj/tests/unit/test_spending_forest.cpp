#include <doctest.h>

#include <cmath>
#include <random>

#include "puremkt/eg_solver.hpp"
#include "puremkt/spending_forest.hpp"
#include "support.hpp"

using namespace puremkt;
using testing::make_market;

namespace {

FractionalAllocation shares(const std::vector<std::vector<double>>& rows) {
  return FractionalAllocation(Matrix::from_rows(rows));
}

// Every good is MBB for every agent (v_ij = alpha_i p_j), shares are dense
// and random, budgets are whatever the shares cost: an equilibrium whose
// spending graph is a complete bipartite graph.
struct DenseEquilibrium {
  Market market;
  FractionalAllocation alloc;
  PriceVector prices;
};

DenseEquilibrium dense_equilibrium(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> price(0.2, 2.0);
  std::uniform_real_distribution<double> alpha(0.5, 3.0);
  std::vector<double> p(m);
  for (auto& v : p) v = price(rng);
  Matrix values(n, m);
  for (AgentIndex i = 0; i < n; ++i) {
    const double a = alpha(rng);
    for (GoodIndex j = 0; j < m; ++j) values(i, j) = a * p[j];
  }
  FractionalAllocation x(testing::random_interior(rng, n, m));
  std::vector<double> e(n, 0.0);
  for (AgentIndex i = 0; i < n; ++i) {
    for (GoodIndex j = 0; j < m; ++j) e[i] += x(i, j) * p[j];
  }
  return {Market(std::move(values), std::move(e)), std::move(x), PriceVector(std::move(p))};
}

std::vector<double> agent_spend(const FractionalAllocation& x, const PriceVector& p) {
  std::vector<double> out(x.n_agents(), 0.0);
  for (AgentIndex i = 0; i < x.n_agents(); ++i) {
    for (GoodIndex j = 0; j < x.n_goods(); ++j) out[i] += x(i, j) * p[j];
  }
  return out;
}

std::vector<double> consumption(const FractionalAllocation& x) {
  std::vector<double> out(x.n_goods(), 0.0);
  for (AgentIndex i = 0; i < x.n_agents(); ++i) {
    for (GoodIndex j = 0; j < x.n_goods(); ++j) out[j] += x(i, j);
  }
  return out;
}

std::size_t components(const SpendingGraph& g) {
  std::size_t count = 0;
  std::vector<bool> seen(g.n_nodes(), false);
  for (NodeId s = 0; s < g.n_nodes(); ++s) {
    if (seen[s]) continue;
    ++count;
    std::vector<NodeId> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  return count;
}

}  // namespace

TEST_SUITE("spending_forest") {

TEST_CASE("build_spending_graph") {
  auto g = build_spending_graph(shares({{0.5}, {0.5}}), PriceVector({2}));
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0].agent == 0);
  CHECK(g.edges()[0].weight == 1.0);
  CHECK(g.edges()[1].agent == 1);
  CHECK(g.edges()[1].weight == 1.0);
  CHECK(g.neighbors(g.good_node(0)) == std::vector<NodeId>{0, 1});
  CHECK(g.weight(1, 0) == 1.0);
  CHECK(g.is_forest());

  g = build_spending_graph(shares({{1, 0, 1}, {0, 1, 0}}), PriceVector({3, 4, 5}));
  REQUIRE(g.edges().size() == 3);
  CHECK(*g.weight(0, 2) == 5.0);
  CHECK_FALSE(g.weight(1, 2));

  g = build_spending_graph(shares({{1, 1}, {0, 0}}), PriceVector({1, 1}));
  CHECK(g.neighbors(1).empty());

  // Shares at the tolerance and zero-priced goods carry no edge.
  g = build_spending_graph(shares({{1e-9, 0.5}, {1 - 1e-9, 0.5}}), PriceVector({1, 0}));
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].agent == 1);
}

TEST_CASE("find_cycle") {
  CHECK_FALSE(find_cycle(build_spending_graph(shares({{0.5}, {0.5}}), PriceVector({2}))));
  const auto square = build_spending_graph(shares({{0.5, 0.5}, {0.5, 0.5}}), PriceVector({1, 1}));
  const auto c = find_cycle(square);
  REQUIRE(c);
  CHECK(*c == Cycle{0, 2, 1, 3});
  CHECK_FALSE(square.is_forest());

  // Agents 0,1 with goods 0,1 and agents 2,3 with goods 2,3.
  const auto twin = build_spending_graph(
      shares({{0, 0, 0.5, 0.5}, {0, 0, 0.5, 0.5}, {0.5, 0.5, 0, 0}, {0.5, 0.5, 0, 0}}),
      PriceVector({1, 1, 1, 1}));
  const auto d = find_cycle(twin);
  REQUIRE(d);
  CHECK(d->front() == 0);
  CHECK(*d == Cycle{0, 6, 1, 7});
}

TEST_CASE("cancel_cycle: equal square") {
  const auto x = shares({{0.5, 0.5}, {0.5, 0.5}});
  const PriceVector p({2, 2});
  const auto y = cancel_cycle(x, p, Cycle{0, 2, 1, 3});
  // Least edge (0,0) goes, the alternation also empties (1,1).
  CHECK(y(0, 0) == 0.0);
  CHECK(y(1, 0) == 1.0);
  CHECK(y(1, 1) == 0.0);
  CHECK(y(0, 1) == 1.0);
  CHECK(agent_spend(y, p) == agent_spend(x, p));
}

TEST_CASE("cancel_cycle: hand trace") {
  // Weights around a0-g0-a1-g1: 0.2, 0.5, 0.3, 0.5.
  const auto x = shares({{0.2, 0.5}, {0.5, 0.3}});
  const PriceVector p({1, 1});
  const auto y = cancel_cycle(x, p, Cycle{0, 2, 1, 3});
  CHECK(y(0, 0) == 0.0);
  CHECK(y(1, 0) == doctest::Approx(0.7));
  CHECK(y(1, 1) == doctest::Approx(0.1));
  CHECK(y(0, 1) == doctest::Approx(0.7));
  const auto before = agent_spend(x, p);
  const auto after = agent_spend(y, p);
  CHECK(after[0] == doctest::Approx(before[0]));
  CHECK(after[1] == doctest::Approx(before[1]));
}

TEST_CASE("cancel_cycle: prices scale the share update") {
  const auto x = shares({{0.25, 0.5}, {0.75, 0.5}});
  const PriceVector p({4, 1});
  // Weights: (0,0)=1, (1,0)=3, (1,1)=0.5, (0,1)=0.5; least is (0,1).
  const auto y = cancel_cycle(x, p, Cycle{0, 2, 1, 3});
  CHECK(y(0, 1) == 0.0);
  CHECK(y(0, 0) == doctest::Approx(0.375));
  CHECK(y(1, 0) == doctest::Approx(0.625));
  CHECK(y(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("cancel_cycle: zero-weight edge changes nothing") {
  const auto x = shares({{0.0, 0.5}, {0.5, 0.5}});
  const PriceVector p({1, 1});
  const auto y = cancel_cycle(x, p, Cycle{0, 2, 1, 3}, -1.0);
  CHECK(y == x);
}

TEST_CASE("cancel_cycle: invalid cycles") {
  const auto x = shares({{0.5, 0.5}, {0.5, 0.5}});
  const PriceVector p({1, 1});
  CHECK_THROWS_AS(cancel_cycle(x, p, Cycle{0, 2, 1}), InvalidCycle);
  CHECK_THROWS_AS(cancel_cycle(x, p, Cycle{0, 1, 2, 3}), InvalidCycle);
  CHECK_THROWS_AS(cancel_cycle(x, p, Cycle{0, 2, 1, 9}), InvalidCycle);
  const auto gap = shares({{0.5, 0.0}, {0.5, 1.0}});
  CHECK_THROWS_AS(cancel_cycle(gap, p, Cycle{0, 2, 1, 3}), InvalidCycle);
}

TEST_CASE("rearrange_to_forest examples") {
  const auto mk = make_market({{1, 1}, {1, 1}}, {1, 1});
  const auto x = shares({{0.5, 0.5}, {0.5, 0.5}});
  const PriceVector p({1, 1});
  const auto r = rearrange_to_forest(mk, x, p);
  CHECK(r.cancellations == 1);
  const auto g = build_spending_graph(r.alloc, p);
  CHECK(g.is_forest());
  CHECK(g.edges().size() == 2);
  CHECK(r.alloc(0, 1) == 1.0);
  CHECK(r.alloc(1, 0) == 1.0);
  CHECK(check_equilibrium(mk, r.alloc, p).is_equilibrium);

  const auto pair = make_market({{1}, {1}}, {1, 1});
  const auto half = shares({{0.5}, {0.5}});
  const auto same = rearrange_to_forest(pair, half, PriceVector({2}));
  CHECK(same.cancellations == 0);
  CHECK(same.alloc == half);

  CHECK_THROWS_AS(rearrange_to_forest(pair, shares({{1}, {0}}), PriceVector({2})),
                  NotAnEquilibrium);
}

TEST_CASE("property: forest pass invariants on dense equilibria") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const std::size_t m = 2 + rng() % 7;
    const auto eq = dense_equilibrium(rng, n, m);
    REQUIRE(check_equilibrium(eq.market, eq.alloc, eq.prices).is_equilibrium);

    // Manual loop: the edge count strictly drops with every cancellation.
    auto x = eq.alloc;
    std::size_t edges = build_spending_graph(x, eq.prices).edges().size();
    while (auto c = find_cycle(build_spending_graph(x, eq.prices))) {
      x = cancel_cycle(x, eq.prices, *c);
      const std::size_t now = build_spending_graph(x, eq.prices).edges().size();
      CHECK(now < edges);
      edges = now;
    }

    const auto r = rearrange_to_forest(eq.market, eq.alloc, eq.prices);
    CHECK(r.cancellations <= n * m);
    const auto g = build_spending_graph(r.alloc, eq.prices);
    CHECK(g.is_forest());
    CHECK_FALSE(find_cycle(g));
    CHECK(g.edges().size() <= g.n_nodes() - components(g));

    const auto s0 = agent_spend(eq.alloc, eq.prices);
    const auto s1 = agent_spend(r.alloc, eq.prices);
    for (AgentIndex i = 0; i < n; ++i) CHECK(std::abs(s0[i] - s1[i]) <= 1e-12);
    const auto c0 = consumption(eq.alloc);
    const auto c1 = consumption(r.alloc);
    for (GoodIndex j = 0; j < m; ++j) CHECK(std::abs(c0[j] - c1[j]) <= 1e-12);
    for (AgentIndex i = 0; i < n; ++i) {
      for (GoodIndex j = 0; j < m; ++j) {
        if (r.alloc(i, j) > 0.0) CHECK(eq.alloc(i, j) > 0.0);
      }
    }
    CHECK(check_equilibrium(eq.market, r.alloc, eq.prices).is_equilibrium);
  }
}

TEST_CASE("property: forest pass on solver output") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto mk = testing::random_market(rng, 2 + rng() % 4, 2 + rng() % 8);
    const auto out = solve_equilibrium(mk);
    const auto r = rearrange_to_forest(mk, out.alloc, out.prices);
    CHECK(build_spending_graph(r.alloc, out.prices).is_forest());
    const auto s0 = agent_spend(out.alloc, out.prices);
    const auto s1 = agent_spend(r.alloc, out.prices);
    for (AgentIndex i = 0; i < mk.n_agents(); ++i) CHECK(std::abs(s0[i] - s1[i]) <= 1e-12);
  }
}

}  // TEST_SUITE
