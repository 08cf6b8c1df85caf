#include "puremkt/eg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace puremkt {

void SolverConfig::validate() const {
  if (max_iters < 1) throw InvalidInput("max_iters must be at least 1");
  if (!(step_decay > 0.0 && step_decay < 1.0)) throw InvalidInput("step_decay must lie in (0,1)");
  if (!(step_growth >= 1.0)) throw InvalidInput("step_growth must be at least 1");
  if (!(convergence_tol > 0.0)) throw InvalidInput("convergence_tol must be positive");
  if (step_size < 0.0) throw InvalidInput("step_size must be nonnegative");
}

namespace {

std::string describe(const Outcome& best) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "solver did not converge: best residual %.3g after %zu iterations",
                best.residual, best.iterations_used);
  return buf;
}

}  // namespace

DidNotConverge::DidNotConverge(Outcome b) : Error(describe(b)), best(std::move(b)) {}

namespace {

void require_shape(const Market& market, const FractionalAllocation& alloc) {
  if (alloc.n_agents() != market.n_agents() || alloc.n_goods() != market.n_goods()) {
    throw DimensionMismatch("allocation shape does not match market");
  }
}

std::vector<double> utilities(const Market& market, const FractionalAllocation& alloc) {
  std::vector<double> u(market.n_agents(), 0.0);
  for (AgentIndex i = 0; i < market.n_agents(); ++i) {
    u[i] = bundle_value(market, i, alloc.shares.row(i));
  }
  return u;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Iterate with shares at or below the spend tolerance dropped and the
// remaining column renormalized; this is what gets evaluated and returned.
FractionalAllocation cleaned(const Matrix& x, double spend_tol) {
  FractionalAllocation out(x);
  for (GoodIndex j = 0; j < x.cols(); ++j) {
    double column = 0.0;
    for (AgentIndex i = 0; i < x.rows(); ++i) {
      if (out(i, j) <= spend_tol) out(i, j) = 0.0;
      column += out(i, j);
    }
    // Ascent keeps every valued column full; restore the mass removed with
    // the dust.
    if (column > 0.0) {
      for (AgentIndex i = 0; i < x.rows(); ++i) out(i, j) /= column;
    }
  }
  return out;
}

}  // namespace

double eg_objective(const Market& market, const FractionalAllocation& alloc) {
  require_shape(market, alloc);
  double total = 0.0;
  for (AgentIndex i = 0; i < market.n_agents(); ++i) {
    const double u = bundle_value(market, i, alloc.shares.row(i));
    if (!(u > 0.0)) return kNegativeInfinityObjective;
    total += market.budget(i) * std::log(u);
  }
  return total;
}

Matrix eg_gradient(const Market& market, const FractionalAllocation& alloc) {
  require_shape(market, alloc);
  Matrix grad(market.n_agents(), market.n_goods());
  const auto u = utilities(market, alloc);
  for (AgentIndex i = 0; i < market.n_agents(); ++i) {
    if (!(u[i] > 0.0)) throw ZeroBundleValue(i);
    const double scale = market.budget(i) / u[i];
    for (GoodIndex j = 0; j < market.n_goods(); ++j) grad(i, j) = scale * market.value(i, j);
  }
  return grad;
}

void project_column(std::span<double> column) {
  double boxed_sum = 0.0;
  for (double v : column) boxed_sum += std::clamp(v, 0.0, 1.0);
  if (boxed_sum <= 1.0) {
    for (double& v : column) v = std::clamp(v, 0.0, 1.0);
    return;
  }
  // The sum constraint is active: project onto the probability simplex
  // (upper bounds are then implied).
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    const double candidate = (prefix - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) threshold = candidate;
  }
  for (double& v : column) v = std::max(v - threshold, 0.0);
}

FractionalAllocation project_feasible(Matrix raw) {
  std::vector<double> column(raw.rows());
  for (GoodIndex j = 0; j < raw.cols(); ++j) {
    for (AgentIndex i = 0; i < raw.rows(); ++i) column[i] = raw(i, j);
    project_column(column);
    for (AgentIndex i = 0; i < raw.rows(); ++i) raw(i, j) = column[i];
  }
  return FractionalAllocation(std::move(raw));
}

PriceVector extract_prices(const Market& market, const FractionalAllocation& alloc) {
  require_shape(market, alloc);
  const auto u = utilities(market, alloc);
  PriceVector p(std::vector<double>(market.n_goods(), 0.0));
  for (AgentIndex i = 0; i < market.n_agents(); ++i) {
    if (!(u[i] > 0.0)) throw ZeroBundleValue(i);
    const double scale = market.budget(i) / u[i];
    for (GoodIndex j = 0; j < market.n_goods(); ++j) {
      p[j] = std::max(p[j], scale * market.value(i, j));
    }
  }
  return p;
}

namespace {

// Rebuilds an equilibrium with exact budgets from the support of a
// near-optimal iterate. A maximum-spend spanning forest of the support fixes
// prices through the MBB equalities, each tree is scaled so its prices sum
// to its budgets, and spends come from a maximum flow over the support.
std::optional<Outcome> polish(const Market& market, const FractionalAllocation& alloc,
                              const PriceVector& prices, double spend_tol) {
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();
  struct Edge {
    AgentIndex agent;
    GoodIndex good;
    double spend;
  };
  std::vector<Edge> edges;
  for (AgentIndex i = 0; i < n; ++i) {
    for (GoodIndex j = 0; j < m; ++j) {
      if (alloc(i, j) > spend_tol) edges.push_back({i, j, alloc(i, j) * prices[j]});
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.spend > b.spend; });

  std::vector<std::size_t> root(n + m);
  std::iota(root.begin(), root.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    return root[a] == a ? a : root[a] = find(root[a]);
  };
  std::vector<std::vector<std::size_t>> tree(n + m);
  for (const Edge& e : edges) {
    const std::size_t a = find(e.agent);
    const std::size_t b = find(n + e.good);
    if (a == b) continue;
    root[a] = b;
    tree[e.agent].push_back(n + e.good);
    tree[n + e.good].push_back(e.agent);
  }

  // ratio[agent] is the MBB ratio, ratio[good] the price.
  std::vector<double> ratio(n + m, 0.0);
  std::vector<char> seen(n + m, 0);
  for (AgentIndex start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> order{start};
    seen[start] = 1;
    ratio[start] = 1.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t a = order[k];
      for (std::size_t b : tree[a]) {
        if (seen[b]) continue;
        seen[b] = 1;
        ratio[b] = a < n ? market.value(a, b - n) / ratio[a] : market.value(b, a - n) / ratio[a];
        order.push_back(b);
      }
    }
    double budget = 0.0;
    double price = 0.0;
    for (std::size_t a : order) {
      if (a < n) {
        budget += market.budget(a);
      } else {
        price += ratio[a];
      }
    }
    if (!(price > 0.0)) return std::nullopt;
    const double c = budget / price;
    for (std::size_t a : order) ratio[a] = a < n ? ratio[a] / c : ratio[a] * c;
  }
  for (GoodIndex j = 0; j < m; ++j) {
    if (!seen[n + j]) return std::nullopt;
  }

  // Edmonds-Karp on source -> agents -> goods -> sink.
  const std::size_t source = n + m;
  const std::size_t sink = n + m + 1;
  struct Arc {
    std::size_t to;
    std::size_t reverse;
    double capacity;
    double flow;
    double scale;
  };
  std::vector<std::vector<Arc>> net(n + m + 2);
  // Residuals below a relative threshold of the arc's scale count as full.
  auto add_arc = [&](std::size_t from, std::size_t to, double capacity, double scale) {
    net[from].push_back({to, net[to].size(), capacity, 0.0, scale});
    net[to].push_back({from, net[from].size() - 1, 0.0, 0.0, scale});
  };
  for (AgentIndex i = 0; i < n; ++i) {
    add_arc(source, i, market.budget(i), market.budget(i));
  }
  for (GoodIndex j = 0; j < m; ++j) add_arc(n + j, sink, ratio[n + j], ratio[n + j]);
  for (const Edge& e : edges) {
    add_arc(e.agent, n + e.good, std::numeric_limits<double>::infinity(), ratio[n + e.good]);
  }

  while (true) {
    std::vector<std::pair<std::size_t, std::size_t>> via(n + m + 2, {sink + 1, 0});
    std::vector<std::size_t> queue{source};
    via[source] = {source, 0};
    for (std::size_t k = 0; k < queue.size() && via[sink].first > sink; ++k) {
      const std::size_t a = queue[k];
      for (std::size_t idx = 0; idx < net[a].size(); ++idx) {
        const Arc& arc = net[a][idx];
        if (via[arc.to].first <= sink || arc.capacity - arc.flow <= 1e-14 * arc.scale) continue;
        via[arc.to] = {a, idx};
        queue.push_back(arc.to);
      }
    }
    if (via[sink].first > sink) break;
    double bottleneck = std::numeric_limits<double>::infinity();
    for (std::size_t v = sink; v != source; v = via[v].first) {
      const Arc& arc = net[via[v].first][via[v].second];
      bottleneck = std::min(bottleneck, arc.capacity - arc.flow);
    }
    for (std::size_t v = sink; v != source; v = via[v].first) {
      Arc& arc = net[via[v].first][via[v].second];
      arc.flow += bottleneck;
      net[v][arc.reverse].flow -= bottleneck;
    }
  }
  Matrix shares(n, m);
  for (AgentIndex i = 0; i < n; ++i) {
    for (const Arc& arc : net[i]) {
      if (arc.to >= n && arc.to < n + m && arc.flow > 0.0) {
        shares(i, arc.to - n) = std::min(arc.flow / ratio[arc.to], 1.0);
      }
    }
  }
  // Flows are accurate relative to the budgets; cheap goods need their
  // columns closed relative to their own size.
  for (GoodIndex j = 0; j < m; ++j) {
    double column = 0.0;
    for (AgentIndex i = 0; i < n; ++i) column += shares(i, j);
    if (column > 0.0) {
      for (AgentIndex i = 0; i < n; ++i) shares(i, j) /= column;
    }
  }
  Outcome out;
  out.alloc = FractionalAllocation(std::move(shares));
  out.prices = PriceVector(std::vector<double>(ratio.begin() + static_cast<std::ptrdiff_t>(n), ratio.end()));
  return out;
}

constexpr double kPolishFrom = 1e-4;

// Solver on a market whose every good is valued by someone.
Outcome ascend(const Market& market, const SolverConfig& config) {
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();
  const Matrix& values = market.valuations();

  Matrix x(n, m, 1.0 / static_cast<double>(n));
  if (config.seed) {
    std::mt19937_64 rng(*config.seed);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    for (GoodIndex j = 0; j < m; ++j) {
      double column = 0.0;
      for (AgentIndex i = 0; i < n; ++i) column += (x(i, j) = unit(rng));
      for (AgentIndex i = 0; i < n; ++i) x(i, j) /= column;
    }
  }

  auto utility_of = [&](const Matrix& alloc) {
    std::vector<double> u(n, 0.0);
    for (AgentIndex i = 0; i < n; ++i) u[i] = dot(values.row(i), alloc.row(i));
    return u;
  };
  auto gradient_of = [&](const std::vector<double>& u) {
    Matrix g(n, m);
    for (AgentIndex i = 0; i < n; ++i) {
      const double scale = market.budget(i) / u[i];
      for (GoodIndex j = 0; j < m; ++j) g(i, j) = scale * values(i, j);
    }
    return g;
  };

  std::vector<double> u = utility_of(x);
  Matrix grad = gradient_of(u);

  // Per-good metric: curvature along good j grows like p_j^2, so column j
  // moves with step * scale[j], scale[j] = 1 / (max_i grad_ij)^2. The
  // metric is constant within a column, which keeps the column-wise
  // Euclidean projection exact.
  std::vector<double> scale(m, 1.0);
  auto update_scale = [&](const Matrix& g) {
    if (!config.precondition) return;
    for (GoodIndex j = 0; j < m; ++j) {
      double top = 0.0;
      for (AgentIndex i = 0; i < n; ++i) top = std::max(top, g(i, j));
      scale[j] = 1.0 / (top * top);
    }
  };
  update_scale(grad);

  double step = config.step_size;
  if (step == 0.0) {
    double gmax = 0.0;
    for (AgentIndex i = 0; i < n; ++i) {
      for (GoodIndex j = 0; j < m; ++j) gmax = std::max(gmax, grad(i, j) * scale[j]);
    }
    step = 0.1 * static_cast<double>(n) / gmax;
  }

  Outcome best;
  best.residual = std::numeric_limits<double>::infinity();
  Matrix prev_x;
  Matrix prev_grad;

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    {
      FractionalAllocation candidate = cleaned(x, config.tol.spend);
      PriceVector prices = extract_prices(market, candidate);
      const double residual =
          check_equilibrium(market, candidate, prices, config.tol).worst_violation();
      if (residual < kPolishFrom) {
        if (auto exact = polish(market, candidate, prices, config.tol.spend)) {
          exact->residual =
              check_equilibrium(market, exact->alloc, exact->prices, config.tol).worst_violation();
          exact->iterations_used = it;
          if (exact->residual <= config.convergence_tol) return *std::move(exact);
        }
      }
      if (residual < best.residual) {
        best = Outcome{std::move(candidate), std::move(prices), residual, it};
      }
      if (best.residual <= config.convergence_tol) return best;
    }

    if (config.step_rule == StepRule::kBarzilaiBorwein && !prev_x.empty()) {
      double ss = 0.0;
      double sy = 0.0;
      for (AgentIndex i = 0; i < n; ++i) {
        for (GoodIndex j = 0; j < m; ++j) {
          const double s = x(i, j) - prev_x(i, j);
          const double y = grad(i, j) - prev_grad(i, j);
          ss += s * s / scale[j];
          sy -= s * y;
        }
      }
      if (sy > 0.0 && ss > 0.0) step = std::clamp(ss / sy, step * 1e-3, step * 1e3);
    }

    bool accepted = false;
    Matrix trial(n, m);
    for (int attempt = 0; attempt < 80 && !accepted; ++attempt) {
      for (AgentIndex i = 0; i < n; ++i) {
        for (GoodIndex j = 0; j < m; ++j) trial(i, j) = x(i, j) + step * scale[j] * grad(i, j);
      }
      trial = project_feasible(std::move(trial)).shares;
      double ascent = 0.0;
      for (std::size_t k = 0; k < x.data().size(); ++k) {
        ascent += grad.data()[k] * (trial.data()[k] - x.data()[k]);
      }
      if (!(ascent > 0.0)) break;
      // Objective change via log1p of relative utility changes, which stays
      // accurate when the change is at rounding level.
      double delta = 0.0;
      bool finite = true;
      for (AgentIndex i = 0; i < n; ++i) {
        double du = 0.0;
        for (GoodIndex j = 0; j < m; ++j) du += values(i, j) * (trial(i, j) - x(i, j));
        if (!(u[i] + du > 0.0)) {
          finite = false;
          break;
        }
        delta += market.budget(i) * std::log1p(du / u[i]);
      }
      if (finite && delta >= 1e-4 * ascent) {
        accepted = true;
      } else {
        step *= config.step_decay;
      }
    }
    // No ascent left at working precision.
    if (!accepted) break;

    prev_x = std::move(x);
    prev_grad = std::move(grad);
    x = std::move(trial);
    u = utility_of(x);
    grad = gradient_of(u);
    update_scale(grad);
    if (config.step_rule == StepRule::kBacktracking) step *= config.step_growth;
    if (config.on_step) config.on_step(it, eg_objective(market, FractionalAllocation(x)));
  }
  // Stalled at working precision: the MBB gaps cannot shrink further, but an
  // equilibrium with exact budgets on the identified support still counts.
  if (auto exact = polish(market, best.alloc, best.prices, config.tol.spend)) {
    const auto report = check_equilibrium(market, exact->alloc, exact->prices, config.tol);
    if (report.is_equilibrium && report.market_clearing.worst <= config.convergence_tol &&
        report.budget_exhaustion.worst <= config.convergence_tol) {
      exact->residual = report.worst_violation();
      exact->iterations_used = best.iterations_used;
      return *std::move(exact);
    }
  }
  throw DidNotConverge(std::move(best));
}

}  // namespace

Outcome solve_equilibrium(const Market& market, const SolverConfig& config) {
  config.validate();
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();

  std::vector<GoodIndex> valued;
  for (GoodIndex j = 0; j < m; ++j) {
    for (AgentIndex i = 0; i < n; ++i) {
      if (market.value(i, j) > 0.0) {
        valued.push_back(j);
        break;
      }
    }
  }

  auto expand = [&](const Outcome& reduced) {
    Outcome full;
    full.alloc = FractionalAllocation(n, m);
    full.prices = PriceVector(std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < valued.size(); ++k) {
      full.prices[valued[k]] = reduced.prices[k];
      for (AgentIndex i = 0; i < n; ++i) full.alloc(i, valued[k]) = reduced.alloc(i, k);
    }
    full.residual = check_equilibrium(market, full.alloc, full.prices, config.tol).worst_violation();
    full.iterations_used = reduced.iterations_used;
    return full;
  };

  if (valued.size() == m) return ascend(market, config);

  Matrix reduced_values(n, valued.size());
  for (AgentIndex i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < valued.size(); ++k) reduced_values(i, k) = market.value(i, valued[k]);
  }
  const Market reduced(std::move(reduced_values), market.budgets());
  try {
    return expand(ascend(reduced, config));
  } catch (DidNotConverge& e) {
    throw DidNotConverge(expand(e.best));
  }
}

}  // namespace puremkt
