#include "puremkt/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "puremkt/errors.hpp"

namespace puremkt {

RootedForest root_forest(const SpendingGraph& graph) {
  if (!graph.is_forest()) throw NotAForest("spending graph has a cycle");
  const std::size_t total = graph.n_nodes();
  RootedForest forest;
  forest.parent.assign(total, std::nullopt);
  forest.children.assign(total, {});
  std::vector<bool> seen(total, false);

  for (AgentIndex a = 0; a < graph.n_agents(); ++a) {
    const NodeId root = graph.agent_node(a);
    if (seen[root]) continue;
    seen[root] = true;
    forest.roots.push_back(root);
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : graph.neighbors(v)) {
        if (seen[w]) continue;
        seen[w] = true;
        forest.parent[w] = v;
        forest.children[v].push_back(w);
        stack.push_back(w);
      }
    }
  }
  // Neighbour lists are ascending, so each children list already is.
  return forest;
}

namespace {

[[noreturn]] void invariant_broken(const std::string& what) {
  throw std::logic_error("rounding invariant violated: " + what);
}

}  // namespace

RoundingResult round_to_pure(const Market& market, const FractionalAllocation& alloc,
                             const PriceVector& prices, const ToleranceConfig& tol) {
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();
  const auto report = check_equilibrium(market, alloc, prices, tol);
  if (!report.is_equilibrium) {
    throw NotAnEquilibrium("rounding needs an equilibrium input (worst violation " +
                           std::to_string(report.worst_violation()) + ")");
  }

  // Shares within the spend tolerance of 1 count as integral holdings.
  FractionalAllocation snapped = alloc;
  std::vector<std::optional<AgentIndex>> integral_holder(m);
  for (GoodIndex j = 0; j < m; ++j) {
    for (AgentIndex i = 0; i < n; ++i) {
      if (snapped(i, j) >= 1.0 - tol.spend) {
        integral_holder[j] = i;
        break;
      }
    }
    if (integral_holder[j]) {
      for (AgentIndex i = 0; i < n; ++i) snapped(i, j) = i == *integral_holder[j] ? 1.0 : 0.0;
    }
  }

  const SpendingGraph graph = build_spending_graph(snapped, prices, tol.spend);
  const RootedForest forest = root_forest(graph);

  RoundingResult result;
  result.prices = prices;
  result.alloc = IntegralAllocation(m);
  auto& owner = result.alloc.owner;
  std::vector<double> spent(n, 0.0);
  std::vector<bool> alive(graph.n_nodes(), true);

  auto assign = [&](GoodIndex j, AgentIndex i) {
    owner[j] = i;
    spent[i] += prices[j];
    alive[graph.good_node(j)] = false;
  };

  // Leaf goods go to their parent agents.
  for (GoodIndex j = 0; j < m; ++j) {
    const NodeId g = graph.good_node(j);
    if (forest.parent[g] && forest.children[g].empty()) assign(j, *forest.parent[g]);
  }

  std::set<AgentIndex> roots;
  for (NodeId r : forest.roots) roots.insert(r);

  while (!roots.empty()) {
    const AgentIndex i = *roots.begin();
    roots.erase(roots.begin());
    ++result.rounds;
    if (forest.parent[i] && alive[*forest.parent[i]]) invariant_broken("processed agent has a parent");

    std::vector<GoodIndex> remaining;
    for (NodeId g : forest.children[i]) {
      if (!alive[g]) continue;
      // Goods are never leaves of the working forest.
      if (forest.children[g].empty()) invariant_broken("good node became a leaf");
      const GoodIndex j = graph.good_of(g);
      if (spent[i] + prices[j] <= market.budget(i) + tol.abs) {
        assign(j, i);
      } else {
        remaining.push_back(j);
      }
    }
    for (GoodIndex j : remaining) {
      const NodeId heir = forest.children[graph.good_node(j)].front();
      assign(j, heir);
    }
    alive[i] = false;
    for (NodeId g : forest.children[i]) {
      for (NodeId k : forest.children[g]) roots.insert(k);
    }
  }

  // Goods outside the forest: zero-priced ones, plus anything the spending
  // graph did not reach.
  for (GoodIndex j = 0; j < m; ++j) {
    if (owner[j]) continue;
    if (integral_holder[j]) {
      assign(j, *integral_holder[j]);
    } else {
      assign(j, 0);
    }
  }

  result.budgets_new.assign(n, 0.0);
  for (GoodIndex j = 0; j < m; ++j) result.budgets_new[*owner[j]] += prices[j];

  result.price_inf = prices.max_norm();
  double sum_old = 0.0;
  double sum_new = 0.0;
  for (AgentIndex i = 0; i < n; ++i) {
    result.perturbation_inf =
        std::max(result.perturbation_inf, std::abs(result.budgets_new[i] - market.budget(i)));
    sum_old += market.budget(i);
    sum_new += result.budgets_new[i];
  }
  result.budget_sum_delta = std::abs(sum_new - sum_old);

  for (AgentIndex i = 0; i < n; ++i) {
    const double e = market.budget(i);
    const double e_new = result.budgets_new[i];
    if (std::abs(e_new - e) <= tol.abs) continue;
    BudgetWitness w;
    w.agent = i;
    w.kind = e_new < e ? BudgetWitness::Kind::kDeficit : BudgetWitness::Kind::kSurplus;
    for (GoodIndex j = 0; j < m; ++j) {
      const bool held = owner[j] == i;
      const bool eligible = w.kind == BudgetWitness::Kind::kDeficit
                                ? !held && snapped(i, j) > tol.spend
                                : held;
      if (eligible && (!w.good || prices[j] > prices[*w.good])) w.good = j;
    }
    result.witnesses.push_back(w);
  }
  return result;
}

CertificationReport certify_rounding(const Market& market, const RoundingResult& result,
                                     const ToleranceConfig& tol) {
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();
  if (result.alloc.n_goods() != m || result.budgets_new.size() != n || result.prices.size() != m) {
    throw DimensionMismatch("rounding result does not match market");
  }
  CertificationReport cert;
  const auto& p = result.prices;
  const auto& owner = result.alloc.owner;

  cert.complete = result.alloc.complete();
  if (!cert.complete) cert.failures.push_back("some good is unassigned");

  std::vector<double> priced(n, 0.0);
  for (GoodIndex j = 0; j < m; ++j) {
    if (owner[j] && *owner[j] < n) priced[*owner[j]] += p[j];
  }
  double sum_old = 0.0;
  double sum_new = 0.0;
  double slack = 0.0;
  for (AgentIndex i = 0; i < n; ++i) {
    cert.budget_mismatch = std::max(cert.budget_mismatch, std::abs(priced[i] - result.budgets_new[i]));
    cert.perturbation_inf =
        std::max(cert.perturbation_inf, std::abs(result.budgets_new[i] - market.budget(i)));
    sum_old += market.budget(i);
    sum_new += result.budgets_new[i];
    slack += tol.abs + tol.rel * market.budget(i);
  }
  cert.budgets_consistent = cert.budget_mismatch <= tol.abs;
  if (!cert.budgets_consistent) cert.failures.push_back("budgets do not equal bundle prices");

  cert.price_inf = p.max_norm();
  // The input equilibrium is only exact up to its budget residuals, which
  // carry over into both bounds.
  cert.perturbation_ok = cert.perturbation_inf <= cert.price_inf + tol.abs + tol.rel * cert.price_inf;
  if (!cert.perturbation_ok) cert.failures.push_back("budget perturbation exceeds max price");

  cert.budget_sum_delta = std::abs(sum_new - sum_old);
  cert.budget_sum_ok = cert.budget_sum_delta <= slack;
  if (!cert.budget_sum_ok) cert.failures.push_back("total budget changed");

  cert.equilibrium = check_equilibrium(market, result.alloc.to_fractional(n), p,
                                       result.budgets_new, tol);
  if (!cert.equilibrium.is_equilibrium) cert.failures.push_back("not an integral equilibrium");
  cert.fpo = cert.equilibrium.is_equilibrium;

  cert.witnesses_ok = true;
  for (AgentIndex i = 0; i < n; ++i) {
    const double e = market.budget(i);
    const double e_new = result.budgets_new[i];
    if (std::abs(e_new - e) <= tol.abs) continue;
    const auto it = std::find_if(result.witnesses.begin(), result.witnesses.end(),
                                 [i](const BudgetWitness& w) { return w.agent == i; });
    bool ok = it != result.witnesses.end() && it->good && *it->good < m;
    if (ok) {
      const GoodIndex g = *it->good;
      const bool held = owner[g] == i;
      if (e_new < e) {
        ok = it->kind == BudgetWitness::Kind::kDeficit && !held && e <= e_new + p[g] + tol.abs;
      } else {
        ok = it->kind == BudgetWitness::Kind::kSurplus && held && e_new <= e + p[g] + tol.abs;
      }
    }
    if (!ok) {
      cert.witnesses_ok = false;
      cert.failures.push_back("missing budget witness for agent " + std::to_string(i));
    }
  }

  cert.pass = cert.complete && cert.budgets_consistent && cert.perturbation_ok &&
              cert.budget_sum_ok && cert.equilibrium.is_equilibrium && cert.witnesses_ok;
  return cert;
}

}  // namespace puremkt
