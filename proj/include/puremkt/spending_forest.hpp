#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "puremkt/equilibrium.hpp"
#include "puremkt/market.hpp"

namespace puremkt {

struct SpendingEdge {
  AgentIndex agent = 0;
  GoodIndex good = 0;
  double weight = 0.0;  // x_ij * p_j
};

/// Node id in the bipartite spending graph: agents are 0..n-1, goods n..n+m-1.
using NodeId = std::size_t;

/// Weighted bipartite agent-good graph with an edge wherever the share
/// exceeds the spend tolerance. Zero-priced goods carry no edges.
class SpendingGraph {
 public:
  SpendingGraph(std::size_t n_agents, std::size_t n_goods, std::vector<SpendingEdge> edges);

  std::size_t n_agents() const { return n_agents_; }
  std::size_t n_goods() const { return n_goods_; }
  std::size_t n_nodes() const { return n_agents_ + n_goods_; }
  const std::vector<SpendingEdge>& edges() const { return edges_; }

  bool is_agent(NodeId v) const { return v < n_agents_; }
  NodeId agent_node(AgentIndex i) const { return i; }
  NodeId good_node(GoodIndex j) const { return n_agents_ + j; }
  GoodIndex good_of(NodeId v) const { return v - n_agents_; }

  /// Neighbours of a node in ascending node order.
  const std::vector<NodeId>& neighbors(NodeId v) const { return adjacency_[v]; }
  std::optional<double> weight(AgentIndex i, GoodIndex j) const;

  bool is_forest() const;

 private:
  std::size_t n_agents_;
  std::size_t n_goods_;
  std::vector<SpendingEdge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
};

SpendingGraph build_spending_graph(const FractionalAllocation& alloc, const PriceVector& prices,
                                   double spend_tol = ToleranceConfig{}.spend);

/// Closed walk a_0 g_0 a_1 g_1 ... g_{k-1} (back to a_0), as node ids.
using Cycle = std::vector<NodeId>;

/// Deterministic cycle search: depth-first from the lowest-index agent,
/// neighbours ascending. Returns std::nullopt on a forest.
std::optional<Cycle> find_cycle(const SpendingGraph& graph);

/// Alternately subtracts and adds the cycle's least edge weight so that edge
/// vanishes; every agent's spend and every good's consumption is unchanged.
FractionalAllocation cancel_cycle(const FractionalAllocation& alloc, const PriceVector& prices,
                                  const Cycle& cycle,
                                  double spend_tol = ToleranceConfig{}.spend);

struct ForestResult {
  FractionalAllocation alloc;
  std::size_t cancellations = 0;
};

/// Cancels cycles until the spending graph is a forest. The input must pass
/// check_equilibrium at `tol` (NotAnEquilibrium otherwise), and so does the
/// output.
ForestResult rearrange_to_forest(const Market& market, const FractionalAllocation& alloc,
                                 const PriceVector& prices, const ToleranceConfig& tol = {});

}  // namespace puremkt
