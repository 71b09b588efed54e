#pragma once

// Synthetic graph encodings and a set-relaxation neighborhood oracle.

#include <random>
#include <set>

#include "dcs/graph_encoding.hpp"

namespace dcs::testing {

/// Random multigraph on `nodes` nodes with `edges` edges; the last third of
/// the edges (at least one) form the frontier. Feature values are random.
inline GraphEncoding random_graph(std::mt19937_64& rng, std::size_t nodes, std::size_t edges,
                                  Eigen::Index node_dim = 7, Eigen::Index edge_dim = 6) {
  GraphEncoding g;
  edges = std::max<std::size_t>(edges, 1);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(nodes - 1));
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  for (std::size_t i = 0; i < edges; ++i) {
    g.edges.push_back({pick(rng), pick(rng)});
    g.edge_transitions.push_back(static_cast<TransitionId>(i));
  }
  for (std::size_t i = 0; i < nodes; ++i) g.node_states.push_back(static_cast<NodeId>(i));
  const std::size_t frontier = std::max<std::size_t>(1, edges / 3);
  for (std::size_t i = edges - frontier; i < edges; ++i) g.frontier.push_back(i);
  g.node_features = RowMatrix::NullaryExpr(static_cast<Eigen::Index>(nodes), node_dim,
                                           [&] { return value(rng); });
  g.edge_features = RowMatrix::NullaryExpr(static_cast<Eigen::Index>(edges), edge_dim,
                                           [&] { return value(rng); });
  return g;
}

/// Nodes within `hops` undirected steps of a seed, by repeated relaxation
/// over the full edge list.
inline std::set<std::uint32_t> reachable_within(const GraphEncoding& g,
                                                const std::vector<std::uint32_t>& seeds,
                                                std::size_t hops) {
  std::set<std::uint32_t> in(seeds.begin(), seeds.end());
  for (std::size_t round = 0; round < hops; ++round) {
    auto next = in;
    for (const auto& e : g.edges) {
      if (in.count(e.source)) next.insert(e.target);
      if (in.count(e.target)) next.insert(e.source);
    }
    in = std::move(next);
  }
  return in;
}

}  // namespace dcs::testing
