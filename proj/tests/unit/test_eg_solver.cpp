#include <doctest.h>

#include <cmath>
#include <random>

#include "puremkt/eg_solver.hpp"
#include "puremkt/generator.hpp"
#include "puremkt/oracles.hpp"
#include "support.hpp"

using namespace puremkt;
using testing::make_market;

TEST_SUITE("eg_solver") {

TEST_CASE("objective") {
  const auto single = make_market({{3, 1}}, {1});
  CHECK(eg_objective(single, FractionalAllocation(Matrix::from_rows({{1, 1}}))) ==
        doctest::Approx(std::log(4.0)));
  const auto two = make_market({{2, 2}, {2, 2}}, {1, 1});
  CHECK(eg_objective(two, FractionalAllocation(Matrix::from_rows({{1, 0}, {0, 1}}))) ==
        doctest::Approx(2 * std::log(2.0)));
  CHECK(eg_objective(two, FractionalAllocation(Matrix::from_rows({{1, 1}, {0, 0}}))) ==
        kNegativeInfinityObjective);
  CHECK_THROWS_AS(eg_objective(two, FractionalAllocation(1, 2)), DimensionMismatch);
}

TEST_CASE("gradient closed form") {
  const auto mk = make_market({{3, 1}, {1, 2}}, {2, 1});
  const FractionalAllocation x(Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
  const auto g = eg_gradient(mk, x);
  CHECK(g(0, 0) == doctest::Approx(2.0 * 3 / 2.0));
  CHECK(g(0, 1) == doctest::Approx(2.0 * 1 / 2.0));
  CHECK(g(1, 0) == doctest::Approx(1.0 * 1 / 1.5));
  CHECK(g(1, 1) == doctest::Approx(1.0 * 2 / 1.5));
  CHECK_THROWS_AS(eg_gradient(mk, FractionalAllocation(Matrix::from_rows({{1, 1}, {0, 0}}))),
                  ZeroBundleValue);
}

TEST_CASE("property: gradient matches central differences") {
  std::mt19937_64 rng(3);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const auto mk = testing::random_market(rng, 2 + rng() % 4, 2 + rng() % 6, false);
    FractionalAllocation x(testing::random_interior(rng, mk.n_agents(), mk.n_goods()));
    const auto g = eg_gradient(mk, x);
    for (AgentIndex i = 0; i < mk.n_agents(); ++i) {
      for (GoodIndex j = 0; j < mk.n_goods(); ++j) {
        auto up = x;
        auto down = x;
        up(i, j) += h;
        down(i, j) -= h;
        const double fd = (eg_objective(mk, up) - eg_objective(mk, down)) / (2 * h);
        const double scale = std::max(std::abs(g(i, j)), 1e-8);
        CHECK(std::abs(fd - g(i, j)) / scale <= 1e-4);
      }
    }
  }
}

TEST_CASE("column projection examples") {
  std::vector<double> a{0.5, 0.3};
  project_column(a);
  CHECK(a == std::vector<double>{0.5, 0.3});
  std::vector<double> b{2, 2};
  project_column(b);
  CHECK(b[0] == doctest::Approx(0.5));
  CHECK(b[1] == doctest::Approx(0.5));
  std::vector<double> c{-1, 0.4};
  project_column(c);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == doctest::Approx(0.4));
  std::vector<double> d{3, -2};
  project_column(d);
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 0.0);
}

namespace {

// Nearest point of {y in [0,1]^2 : y1 + y2 <= 1} by exhaustive grid search.
std::pair<double, double> grid_projection(double r0, double r1, int steps) {
  double best = INFINITY;
  std::pair<double, double> arg;
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; a + b <= steps; ++b) {
      const double y0 = static_cast<double>(a) / steps;
      const double y1 = static_cast<double>(b) / steps;
      const double d = (y0 - r0) * (y0 - r0) + (y1 - r1) * (y1 - r1);
      if (d < best) {
        best = d;
        arg = {y0, y1};
      }
    }
  }
  return arg;
}

}  // namespace

TEST_CASE("column projection agrees with grid search") {
  const auto [y0, y1] = grid_projection(2, 2, 1000);
  CHECK(y0 == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(y1 == doctest::Approx(0.5).epsilon(1e-3));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> raw(-1.5, 2.5);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> col{raw(rng), raw(rng)};
    const auto ref = grid_projection(col[0], col[1], 400);
    project_column(col);
    CHECK(std::abs(col[0] - ref.first) <= 2.5e-3 + 1e-12);
    CHECK(std::abs(col[1] - ref.second) <= 2.5e-3 + 1e-12);
  }
}

TEST_CASE("property: projection satisfies the variational inequality") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> raw(-2.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<double> r(n);
    for (auto& v : r) v = raw(rng);
    std::vector<double> y = r;
    project_column(y);
    double sum = 0.0;
    for (double v : y) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(sum <= 1.0 + 1e-12);
    // (r - y) . (z - y) <= 0 for feasible z.
    for (int k = 0; k < 20; ++k) {
      std::vector<double> z(n);
      double zs = 0.0;
      for (auto& v : z) zs += (v = unit(rng));
      const double cap = unit(rng);
      for (auto& v : z) v *= cap / std::max(zs, 1.0);
      double inner = 0.0;
      for (std::size_t i = 0; i < n; ++i) inner += (r[i] - y[i]) * (z[i] - y[i]);
      CHECK(inner <= 1e-9);
    }
  }
}

TEST_CASE("project_feasible is column-wise") {
  const auto x = project_feasible(Matrix::from_rows({{2, 0.5, -1}, {2, 0.3, 0.4}}));
  CHECK(x(0, 0) == doctest::Approx(0.5));
  CHECK(x(1, 0) == doctest::Approx(0.5));
  CHECK(x(0, 1) == 0.5);
  CHECK(x(1, 1) == 0.3);
  CHECK(x(0, 2) == 0.0);
  CHECK(x(1, 2) == doctest::Approx(0.4));
}

TEST_CASE("extract_prices") {
  const auto single = make_market({{3, 1}}, {1});
  const auto p = extract_prices(single, FractionalAllocation(Matrix::from_rows({{1, 1}})));
  CHECK(p[0] == doctest::Approx(0.75));
  CHECK(p[1] == doctest::Approx(0.25));
  const auto pair = make_market({{1}, {1}}, {1, 1});
  CHECK(extract_prices(pair, FractionalAllocation(Matrix::from_rows({{0.5}, {0.5}})))[0] == 2.0);
  const auto unvalued = make_market({{1, 0}, {2, 0}}, {1, 1});
  CHECK(extract_prices(unvalued, FractionalAllocation(Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}})))[1] ==
        0.0);
  CHECK_THROWS_AS(extract_prices(pair, FractionalAllocation(Matrix::from_rows({{1}, {0}}))),
                  ZeroBundleValue);
}

TEST_CASE("solve: one good, two equal agents") {
  const auto mk = make_market({{1}, {1}}, {1, 1});
  const auto out = solve_equilibrium(mk);
  CHECK(out.alloc(0, 0) == doctest::Approx(0.5));
  CHECK(out.alloc(1, 0) == doctest::Approx(0.5));
  CHECK(out.prices[0] == doctest::Approx(2.0));
  CHECK(out.residual <= SolverConfig{}.convergence_tol);
}

TEST_CASE("solve: identical agents and goods") {
  const auto mk = make_market({{1, 1, 1}, {1, 1, 1}}, {1, 1});
  const auto out = solve_equilibrium(mk);
  for (GoodIndex j = 0; j < 3; ++j) CHECK(out.prices[j] == doctest::Approx(2.0 / 3.0));
  const auto r = check_equilibrium(mk, out.alloc, out.prices);
  CHECK(r.is_equilibrium);
  CHECK(r.budget_residuals[0] <= 1e-9);
  CHECK(r.budget_residuals[1] <= 1e-9);
}

TEST_CASE("solve: comparative family prices") {
  // Small eps: the last agents buy into the first block as well.
  for (std::size_t n : {1U, 2U, 4U}) {
    const auto out = solve_equilibrium(comparative_instance(n, 0.01));
    const auto exact = comparative_equilibrium_prices(n, 0.01);
    for (GoodIndex j = 0; j < exact.size(); ++j) {
      CHECK(out.prices[j] == doctest::Approx(exact[j]).epsilon(1e-6));
    }
  }
  // eps >= 1/(2n): the quoted closed form holds.
  const auto out = solve_equilibrium(comparative_instance(2, 0.3));
  const auto quoted = comparative_expected_prices(2);
  for (GoodIndex j = 0; j < quoted.size(); ++j) {
    CHECK(out.prices[j] == doctest::Approx(quoted[j]).epsilon(1e-6));
  }
  CHECK(quoted[0] == 0.5);
  CHECK(quoted[6] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("solve: goods nobody values get price zero") {
  const auto mk = make_market({{1, 0, 2}, {3, 0, 1}}, {1, 2});
  const auto out = solve_equilibrium(mk);
  CHECK(out.prices[1] == 0.0);
  CHECK(out.alloc(0, 1) == 0.0);
  CHECK(out.alloc(1, 1) == 0.0);
  CHECK(check_equilibrium(mk, out.alloc, out.prices).is_equilibrium);
  CHECK(out.residual == check_equilibrium(mk, out.alloc, out.prices).worst_violation());
}

TEST_CASE("property: converged outcomes satisfy the equilibrium identities") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    const auto mk = testing::random_market(rng, 2 + rng() % 5, 1 + rng() % 10, trial % 2 == 0);
    const auto out = solve_equilibrium(mk);
    const auto r = check_equilibrium(mk, out.alloc, out.prices);
    CHECK(r.is_equilibrium);
    CHECK(out.residual == r.worst_violation());
    CHECK(out.prices.sum() == doctest::Approx(mk.total_budget()).epsilon(1e-9));
    // The KKT maximum is attained on spent-on goods.
    std::vector<double> u(mk.n_agents());
    for (AgentIndex i = 0; i < mk.n_agents(); ++i) {
      u[i] = bundle_value(mk, i, out.alloc.shares.row(i));
    }
    for (AgentIndex i = 0; i < mk.n_agents(); ++i) {
      for (GoodIndex j = 0; j < mk.n_goods(); ++j) {
        if (out.alloc(i, j) <= ToleranceConfig{}.spend) continue;
        CHECK(mk.budget(i) * mk.value(i, j) / u[i] >= out.prices[j] * (1 - ToleranceConfig{}.rel));
      }
    }
  }
}

TEST_CASE("property: generated instances converge") {
  GeneratorConfig g;
  for (std::size_t n : {2U, 4U, 8U}) {
    g.n_agents = n;
    for (std::size_t t = 0; t < 10; ++t) {
      const auto mk = generate_instance(g, t);
      const auto out = solve_equilibrium(mk);
      CHECK(check_equilibrium(mk, out.alloc, out.prices).is_equilibrium);
    }
  }
}

TEST_CASE("property: backtracking ascent is monotone") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mk = testing::random_market(rng, 2 + rng() % 4, 2 + rng() % 8, false);
    SolverConfig config;
    config.step_rule = StepRule::kBacktracking;
    std::vector<double> trace;
    config.on_step = [&](std::size_t, double f) { trace.push_back(f); };
    solve_equilibrium(mk, config);
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] >= trace[k - 1]);
  }
}

TEST_CASE("step rules, metric and start point do not change the prices") {
  GeneratorConfig g;
  g.n_agents = 4;
  const auto mk = generate_instance(g, 3);
  const auto base = solve_equilibrium(mk);
  SolverConfig bt;
  bt.step_rule = StepRule::kBacktracking;
  SolverConfig seeded;
  seeded.seed = 99;
  for (const auto& config : {bt, seeded}) {
    const auto other = solve_equilibrium(mk, config);
    for (GoodIndex j = 0; j < mk.n_goods(); ++j) {
      CHECK(other.prices[j] == doctest::Approx(base.prices[j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("unpreconditioned ascent on a well-scaled market") {
  const auto mk = make_market({{3, 1, 2}, {1, 2, 2}, {2, 2, 1}}, {1, 2, 1});
  const auto base = solve_equilibrium(mk);
  SolverConfig plain;
  plain.precondition = false;
  const auto other = solve_equilibrium(mk, plain);
  for (GoodIndex j = 0; j < mk.n_goods(); ++j) {
    CHECK(other.prices[j] == doctest::Approx(base.prices[j]).epsilon(1e-6));
  }
}

TEST_CASE("deterministic") {
  GeneratorConfig g;
  g.n_agents = 4;
  const auto mk = generate_instance(g, 1);
  const auto a = solve_equilibrium(mk);
  const auto b = solve_equilibrium(mk);
  CHECK(a.alloc == b.alloc);
  CHECK(a.prices == b.prices);
  CHECK(a.iterations_used == b.iterations_used);
}

TEST_CASE("non-convergence carries the best iterate") {
  GeneratorConfig g;
  g.n_agents = 8;
  const auto mk = generate_instance(g, 0);
  SolverConfig config;
  config.max_iters = 1;
  config.convergence_tol = 1e-300;
  try {
    solve_equilibrium(mk, config);
    FAIL("expected DidNotConverge");
  } catch (const DidNotConverge& e) {
    CHECK(e.best.iterations_used == 1);
    CHECK(e.best.alloc.n_goods() == mk.n_goods());
    CHECK(e.best.residual > 0.0);
    CHECK(std::string(e.what()).find("did not converge") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  const auto mk = make_market({{1}}, {1});
  SolverConfig c;
  c.max_iters = 0;
  CHECK_THROWS_AS(solve_equilibrium(mk, c), InvalidInput);
  c = {};
  c.step_decay = 1.0;
  CHECK_THROWS_AS(solve_equilibrium(mk, c), InvalidInput);
  c = {};
  c.convergence_tol = 0.0;
  CHECK_THROWS_AS(solve_equilibrium(mk, c), InvalidInput);
  c = {};
  c.step_size = -1.0;
  CHECK_THROWS_AS(solve_equilibrium(mk, c), InvalidInput);
}

}  // TEST_SUITE
