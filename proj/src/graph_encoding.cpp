#include "dcs/graph_encoding.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "dcs/version.hpp"

namespace dcs {

namespace {

std::vector<std::size_t> extend_path(const std::vector<std::size_t>& parent, std::size_t label) {
  std::vector<std::size_t> p = parent;
  auto it = std::lower_bound(p.begin(), p.end(), label);
  if (it == p.end() || *it != label) p.insert(it, label);
  return p;
}

// Appends discovered nodes and history edges not yet in `g`.
void append_explored(const ExplorationState& es, const NormalizedAlphabet& alphabet,
                     GraphEncoding& g, std::vector<std::int64_t>& node_of,
                     std::vector<std::vector<std::size_t>>& path, std::size_t& discovered,
                     std::size_t& history) {
  node_of.resize(es.num_nodes(), -1);
  const auto& order = es.discovery_order();
  for (; discovered < order.size(); ++discovered) {
    const NodeId n = order[discovered];
    node_of[n] = static_cast<std::int64_t>(g.node_states.size());
    g.node_states.push_back(n);
    if (auto p = es.discovery_parent(n)) {
      const auto& tr = es.transition(*p);
      path.push_back(extend_path(path[node_of[tr.source]], alphabet.index_of(tr.label)));
    } else {
      path.emplace_back();
    }
  }
  const auto& h = es.history();
  for (; history < h.size(); ++history) {
    const auto& tr = es.transition(h[history]);
    g.edges.push_back({static_cast<std::uint32_t>(node_of[tr.source]),
                       static_cast<std::uint32_t>(node_of[tr.target])});
    g.edge_transitions.push_back(h[history]);
  }
}

// Appends placeholders and frontier edges, then fills every feature row.
void append_frontier_and_features(const ExplorationState& es, const NormalizedAlphabet& alphabet,
                                  GraphEncoding& g, const std::vector<std::int64_t>& node_of,
                                  const std::vector<std::vector<std::size_t>>& path) {
  std::unordered_map<NodeId, std::uint32_t> placeholder;
  g.frontier.clear();
  for (TransitionId t : es.frontier()) {
    const auto& tr = es.transition(t);
    std::uint32_t target;
    if (node_of[tr.target] >= 0) {
      target = static_cast<std::uint32_t>(node_of[tr.target]);
    } else {
      auto [it, inserted] =
          placeholder.try_emplace(tr.target, static_cast<std::uint32_t>(g.node_states.size()));
      if (inserted) g.node_states.push_back(tr.target);
      target = it->second;
    }
    g.frontier.push_back(g.edges.size());
    g.edges.push_back({static_cast<std::uint32_t>(node_of[tr.source]), target});
    g.edge_transitions.push_back(t);
  }

  g.node_features.resize(static_cast<Eigen::Index>(g.num_nodes()), kNodeFeatureDim);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    g.node_features.row(static_cast<Eigen::Index>(i)) =
        node_features(es, g.node_states[i]).transpose();
  }
  const auto fe = edge_feature_dim(alphabet.size());
  g.edge_features.resize(static_cast<Eigen::Index>(g.num_edges()), static_cast<Eigen::Index>(fe));
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const auto source = es.transition(g.edge_transitions[i]).source;
    detail::fill_edge_features(es, g.edge_transitions[i], alphabet, path[node_of[source]],
                               g.edge_features.row(static_cast<Eigen::Index>(i)).data());
  }
}

}  // namespace

GraphEncoding build_graph(const ExplorationState& es, const NormalizedAlphabet& alphabet) {
  GraphEncoding g;
  std::vector<std::int64_t> node_of;
  std::vector<std::vector<std::size_t>> path;
  std::size_t discovered = 0, history = 0;
  append_explored(es, alphabet, g, node_of, path, discovered, history);
  append_frontier_and_features(es, alphabet, g, node_of, path);
  return g;
}

const GraphEncoding& IncrementalGraphBuilder::update(const ExplorationState& es) {
  if (es.discovery_order().size() < discovered_ || es.history().size() < history_ ||
      (history_ > 0 && es.history()[history_ - 1] != graph_.edge_transitions[history_ - 1])) {
    throw ContractViolation("incremental graph builder: state is not a continuation of the run");
  }
  graph_.edges.resize(history_);
  graph_.edge_transitions.resize(history_);
  graph_.node_states.resize(discovered_);
  append_explored(es, *alphabet_, graph_, node_of_, path_, discovered_, history_);
  append_frontier_and_features(es, *alphabet_, graph_, node_of_, path_);
  return graph_;
}

std::vector<std::uint32_t> frontier_endpoints(const GraphEncoding& g) {
  std::vector<std::uint32_t> seeds;
  seeds.reserve(2 * g.frontier.size());
  for (auto i : g.frontier) {
    seeds.push_back(g.edges[i].source);
    seeds.push_back(g.edges[i].target);
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

Subgraph khop_subgraph(const GraphEncoding& g, const std::vector<std::uint32_t>& seeds,
                       std::size_t hops) {
  if (seeds.empty()) throw ContractViolation("khop_subgraph: empty seed set");
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& e : g.edges) {
    adj[e.source].push_back(e.target);
    adj[e.target].push_back(e.source);
  }
  constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);
  std::vector<std::size_t> depth(n, kUnseen);
  std::deque<std::uint32_t> queue;
  for (auto s : seeds) {
    if (s >= n) throw ContractViolation("khop_subgraph: seed out of range");
    if (depth[s] == kUnseen) {
      depth[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    if (depth[v] == hops) continue;
    for (auto u : adj[v]) {
      if (depth[u] == kUnseen) {
        depth[u] = depth[v] + 1;
        queue.push_back(u);
      }
    }
  }

  Subgraph sub;
  std::vector<std::int64_t> remap(n, -1);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (depth[v] == kUnseen) continue;
    remap[v] = static_cast<std::int64_t>(sub.node_map.size());
    sub.node_map.push_back(v);
  }
  std::vector<std::int64_t> edge_remap(g.num_edges(), -1);
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const auto& e = g.edges[i];
    if (remap[e.source] < 0 || remap[e.target] < 0) continue;
    edge_remap[i] = static_cast<std::int64_t>(sub.edge_map.size());
    sub.edge_map.push_back(i);
  }

  auto& s = sub.graph;
  s.node_states.reserve(sub.node_map.size());
  s.node_features.resize(static_cast<Eigen::Index>(sub.node_map.size()), g.node_features.cols());
  for (std::size_t i = 0; i < sub.node_map.size(); ++i) {
    s.node_states.push_back(g.node_states[sub.node_map[i]]);
    s.node_features.row(static_cast<Eigen::Index>(i)) = g.node_features.row(sub.node_map[i]);
  }
  s.edge_features.resize(static_cast<Eigen::Index>(sub.edge_map.size()), g.edge_features.cols());
  for (std::size_t i = 0; i < sub.edge_map.size(); ++i) {
    const auto& e = g.edges[sub.edge_map[i]];
    s.edges.push_back({static_cast<std::uint32_t>(remap[e.source]),
                       static_cast<std::uint32_t>(remap[e.target])});
    s.edge_transitions.push_back(g.edge_transitions[sub.edge_map[i]]);
    s.edge_features.row(static_cast<Eigen::Index>(i)) =
        g.edge_features.row(static_cast<Eigen::Index>(sub.edge_map[i]));
  }
  for (auto i : g.frontier) {
    if (edge_remap[i] >= 0) s.frontier.push_back(static_cast<std::size_t>(edge_remap[i]));
  }
  return sub;
}

nlohmann::json graph_to_json(const GraphEncoding& g, const ExplorationState& es) {
  auto rows = [](const RowMatrix& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      out.push_back(std::vector<double>(m.row(r).data(), m.row(r).data() + m.cols()));
    }
    return out;
  };
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const NodeId n = g.node_states[i];
    nodes.push_back({{"id", i},
                     {"state", es.plant_state(n).locals},
                     {"placeholder", !es.is_discovered(n)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    edges.push_back({{"source", g.edges[i].source},
                     {"target", g.edges[i].target},
                     {"label", es.model().label_name(es.transition(g.edge_transitions[i]).label)}});
  }
  return {{"format", "dcs-graph"},
          {"version", kGraphDumpFormatVersion},
          {"tool_version", kToolVersion},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"node_features", rows(g.node_features)},
          {"edge_features", rows(g.edge_features)},
          {"frontier", g.frontier}};
}

}  // namespace dcs
