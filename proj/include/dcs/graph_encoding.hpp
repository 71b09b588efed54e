#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "dcs/exploration.hpp"
#include "dcs/features.hpp"

namespace dcs {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GraphEdge {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Graph over the expanded history and the frontier.
///
/// Nodes: discovered states in discovery order, then undiscovered frontier
/// targets (one node per plant state) in frontier order. Edges: history in
/// expansion order, then the frontier in canonical order; `frontier` lists
/// the positions of frontier edges.
struct GraphEncoding {
  std::vector<GraphEdge> edges;
  RowMatrix edge_features;  ///< |E| x F_e
  RowMatrix node_features;  ///< N x F_n
  std::vector<std::size_t> frontier;
  std::vector<NodeId> node_states;            ///< graph node -> exploration node
  std::vector<TransitionId> edge_transitions;  ///< graph edge -> exploration transition

  std::size_t num_nodes() const { return node_states.size(); }
  std::size_t num_edges() const { return edges.size(); }

  friend bool operator==(const GraphEncoding&, const GraphEncoding&) = default;
};

/// Builds the encoding from scratch.
GraphEncoding build_graph(const ExplorationState& es, const NormalizedAlphabet& alphabet);

/// Maintains discovered-node ids and history edges across steps of one run
/// and rebuilds only the frontier part and the feature rows.
class IncrementalGraphBuilder {
 public:
  explicit IncrementalGraphBuilder(const NormalizedAlphabet& alphabet) : alphabet_(&alphabet) {}

  /// Throws ContractViolation if `es` is not a continuation of the run seen
  /// by previous calls.
  const GraphEncoding& update(const ExplorationState& es);
  const GraphEncoding& current() const { return graph_; }

 private:
  const NormalizedAlphabet* alphabet_;
  GraphEncoding graph_;
  std::vector<std::int64_t> node_of_;  ///< exploration node -> discovered graph node
  std::vector<std::vector<std::size_t>> path_;  ///< per discovered graph node
  std::size_t discovered_ = 0;
  std::size_t history_ = 0;
};

struct Subgraph {
  GraphEncoding graph;
  std::vector<std::uint32_t> node_map;  ///< sub node -> original node
  std::vector<std::size_t> edge_map;    ///< sub edge -> original edge
};

/// Induced subgraph on all nodes within `hops` undirected hops of `seeds`.
/// Frontier positions are remapped; frontier edges leaving the node set are
/// dropped. Throws ContractViolation on an empty or out-of-range seed set.
Subgraph khop_subgraph(const GraphEncoding& g, const std::vector<std::uint32_t>& seeds,
                       std::size_t hops);

/// Endpoints of all frontier edges, ascending and deduplicated.
std::vector<std::uint32_t> frontier_endpoints(const GraphEncoding& g);

nlohmann::json graph_to_json(const GraphEncoding& g, const ExplorationState& es);

}  // namespace dcs
