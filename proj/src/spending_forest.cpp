#include "puremkt/spending_forest.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "puremkt/errors.hpp"

namespace puremkt {

SpendingGraph::SpendingGraph(std::size_t n_agents, std::size_t n_goods,
                             std::vector<SpendingEdge> edges)
    : n_agents_(n_agents), n_goods_(n_goods), edges_(std::move(edges)), adjacency_(n_nodes()) {
  std::sort(edges_.begin(), edges_.end(), [](const SpendingEdge& a, const SpendingEdge& b) {
    return std::tie(a.agent, a.good) < std::tie(b.agent, b.good);
  });
  for (const auto& e : edges_) {
    if (e.agent >= n_agents_ || e.good >= n_goods_) throw IndexOutOfRange("edge endpoint out of range");
    if (e.weight < 0.0) throw InvalidInput("negative spending edge weight");
    adjacency_[agent_node(e.agent)].push_back(good_node(e.good));
    adjacency_[good_node(e.good)].push_back(agent_node(e.agent));
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

std::optional<double> SpendingGraph::weight(AgentIndex i, GoodIndex j) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{i, j},
                             [](const SpendingEdge& e, const std::pair<AgentIndex, GoodIndex>& k) {
                               return std::tie(e.agent, e.good) < std::tie(k.first, k.second);
                             });
  if (it == edges_.end() || it->agent != i || it->good != j) return std::nullopt;
  return it->weight;
}

bool SpendingGraph::is_forest() const {
  // |E| = |V| - #components exactly for forests.
  std::vector<NodeId> parent(n_nodes());
  std::iota(parent.begin(), parent.end(), NodeId{0});
  auto find = [&](NodeId v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : edges_) {
    const NodeId a = find(agent_node(e.agent));
    const NodeId b = find(good_node(e.good));
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

SpendingGraph build_spending_graph(const FractionalAllocation& alloc, const PriceVector& prices,
                                   double spend_tol) {
  if (prices.size() != alloc.n_goods()) throw DimensionMismatch("price vector does not match goods");
  std::vector<SpendingEdge> edges;
  for (AgentIndex i = 0; i < alloc.n_agents(); ++i) {
    for (GoodIndex j = 0; j < alloc.n_goods(); ++j) {
      if (alloc(i, j) > spend_tol && prices[j] > 0.0) {
        edges.push_back({i, j, alloc(i, j) * prices[j]});
      }
    }
  }
  return SpendingGraph(alloc.n_agents(), alloc.n_goods(), std::move(edges));
}

std::optional<Cycle> find_cycle(const SpendingGraph& graph) {
  constexpr NodeId kNone = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> parent(graph.n_nodes(), kNone);
  std::vector<bool> visited(graph.n_nodes(), false);

  struct Frame {
    NodeId node;
    std::size_t next;
  };
  // Agents first (node ids are agents-then-goods), so the first root is the
  // lowest-index agent.
  for (NodeId root = 0; root < graph.n_nodes(); ++root) {
    if (visited[root]) continue;
    visited[root] = true;
    std::vector<Frame> stack{{root, 0}};
    while (!stack.empty()) {
      Frame& top = stack.back();
      const auto& nbrs = graph.neighbors(top.node);
      if (top.next == nbrs.size()) {
        stack.pop_back();
        continue;
      }
      const NodeId w = nbrs[top.next++];
      if (w == parent[top.node]) continue;
      if (visited[w]) {
        // Back edge top.node -> w: w is an ancestor on the stack.
        Cycle path;
        for (NodeId v = top.node; v != w; v = parent[v]) path.push_back(v);
        path.push_back(w);
        std::reverse(path.begin(), path.end());
        // Rotate so the cycle starts at its lowest-index agent.
        NodeId start = kNone;
        for (std::size_t k = 0; k < path.size(); ++k) {
          if (graph.is_agent(path[k]) && (start == kNone || path[k] < path[start])) start = k;
        }
        std::rotate(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(start), path.end());
        if (path.size() > 2 && path[1] > path.back()) std::reverse(path.begin() + 1, path.end());
        return path;
      }
      visited[w] = true;
      parent[w] = top.node;
      stack.push_back({w, 0});
    }
  }
  return std::nullopt;
}

FractionalAllocation cancel_cycle(const FractionalAllocation& alloc, const PriceVector& prices,
                                  const Cycle& cycle, double spend_tol) {
  const std::size_t n = alloc.n_agents();
  const std::size_t k = cycle.size();
  if (k < 4 || k % 2 != 0) throw InvalidCycle("cycle must have even length of at least 4");

  struct CycleEdge {
    AgentIndex agent;
    GoodIndex good;
    double weight;
  };
  std::vector<CycleEdge> edges;
  edges.reserve(k);
  for (std::size_t t = 0; t < k; ++t) {
    const NodeId a = cycle[t];
    const NodeId b = cycle[(t + 1) % k];
    const bool a_agent = a < n;
    if (a_agent == (b < n)) throw InvalidCycle("cycle does not alternate agents and goods");
    const AgentIndex i = a_agent ? a : b;
    const GoodIndex j = (a_agent ? b : a) - n;
    if (j >= alloc.n_goods()) throw InvalidCycle("cycle node out of range");
    if (!(alloc(i, j) > spend_tol) || !(prices[j] > 0.0)) {
      throw InvalidCycle("edge (" + std::to_string(i) + "," + std::to_string(j) +
                         ") is not in the spending graph");
    }
    edges.push_back({i, j, alloc(i, j) * prices[j]});
  }

  std::size_t least = 0;
  for (std::size_t t = 1; t < k; ++t) {
    const auto& e = edges[t];
    const auto& b = edges[least];
    if (e.weight < b.weight ||
        (e.weight == b.weight && std::tie(e.agent, e.good) < std::tie(b.agent, b.good))) {
      least = t;
    }
  }
  const double w = edges[least].weight;

  FractionalAllocation out = alloc;
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t pos = (least + t) % k;
    const auto& e = edges[pos];
    if (pos == least) {
      out(e.agent, e.good) = 0.0;
      continue;
    }
    const double updated = t % 2 == 0 ? e.weight - w : e.weight + w;
    out(e.agent, e.good) = std::clamp(updated / prices[e.good], 0.0, 1.0);
  }
  return out;
}

ForestResult rearrange_to_forest(const Market& market, const FractionalAllocation& alloc,
                                 const PriceVector& prices, const ToleranceConfig& tol) {
  const auto before = check_equilibrium(market, alloc, prices, tol);
  if (!before.is_equilibrium) {
    throw NotAnEquilibrium("forest rearrangement needs an equilibrium input (worst violation " +
                           std::to_string(before.worst_violation()) + ")");
  }
  ForestResult result{alloc, 0};
  const std::size_t limit = market.n_agents() * market.n_goods();
  while (true) {
    const SpendingGraph graph = build_spending_graph(result.alloc, prices, tol.spend);
    const auto cycle = find_cycle(graph);
    if (!cycle) break;
    if (result.cancellations == limit) {
      throw NotAForest("cycle cancellation exceeded n*m iterations");
    }
    result.alloc = cancel_cycle(result.alloc, prices, *cycle, tol.spend);
    ++result.cancellations;
  }
  const auto after = check_equilibrium(market, result.alloc, prices, tol);
  if (!after.is_equilibrium) {
    throw NotAnEquilibrium("forest rearrangement broke the equilibrium (worst violation " +
                           std::to_string(after.worst_violation()) + ")");
  }
  return result;
}

}  // namespace puremkt
