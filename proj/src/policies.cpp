#include "dcs/policies.hpp"

#include <algorithm>
#include <charconv>
#include <deque>

namespace dcs {

namespace {

void require_frontier(const ExplorationState& es) {
  if (es.frontier().empty()) throw ContractViolation("policy: empty frontier");
}

}  // namespace

TransitionId RandomPolicy::select(const ExplorationState& es, Rng& rng) {
  require_frontier(es);
  std::uniform_int_distribution<std::size_t> pick(0, es.frontier().size() - 1);
  return es.frontier()[pick(rng)];
}

TransitionId BfsPolicy::select(const ExplorationState& es, Rng&) {
  require_frontier(es);
  return es.frontier().front();
}

TransitionId DfsPolicy::select(const ExplorationState& es, Rng&) {
  require_frontier(es);
  const auto& f = es.frontier();
  // Ids grow with the source's discovery index, so the newest source owns
  // the tail of the frontier.
  const NodeId newest = es.transition(f.back()).source;
  std::size_t i = f.size() - 1;
  while (i > 0 && es.transition(f[i - 1]).source == newest) --i;
  return f[i];
}

GoalDistance::GoalDistance(const CompositeModel& model) {
  for (const auto& a : model.components()) {
    std::vector<std::vector<LocalState>> preds(a.num_states());
    for (const auto& t : a.transitions) preds[t.target].push_back(t.source);
    std::vector<std::size_t> dist(a.num_states(), kUnknownDistance);
    std::deque<LocalState> queue;
    for (LocalState s = 0; s < a.num_states(); ++s) {
      if (a.marked[s]) {
        dist[s] = 0;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      for (auto u : preds[v]) {
        if (dist[u] == kUnknownDistance) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
      }
    }
    local_.push_back(std::move(dist));
  }
}

std::size_t GoalDistance::estimate(const PlantState& s) const {
  if (s.arity() != local_.size()) throw ContractViolation("goal distance: arity mismatch");
  std::size_t d = 0;
  for (std::size_t c = 0; c < local_.size(); ++c) d = std::max(d, local_[c].at(s.locals[c]));
  return d;
}

RaKey make_ra_key(bool controllable, std::size_t distance, std::size_t canonical) {
  return {controllable, !controllable && distance != kUnknownDistance, distance, canonical};
}

void RaPolicy::prepare(const CompositeModel& model) { distance_ = GoalDistance(model); }

RaKey RaPolicy::key(const ExplorationState& es, TransitionId t, std::size_t canonical) const {
  const auto& tr = es.transition(t);
  return make_ra_key(tr.controllable, distance_.estimate(es.plant_state(tr.target)), canonical);
}

TransitionId RaPolicy::select(const ExplorationState& es, Rng&) {
  require_frontier(es);
  const auto& f = es.frontier();
  std::size_t best = 0;
  RaKey best_key = key(es, f[0], 0);
  for (std::size_t i = 1; i < f.size(); ++i) {
    const RaKey k = key(es, f[i], i);
    if (k < best_key) {
      best_key = k;
      best = i;
    }
  }
  return f[best];
}

std::size_t argmax_first(const Eigen::VectorXd& q) {
  if (q.size() == 0) throw ContractViolation("argmax over an empty vector");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q[i] > q[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

std::size_t epsilon_greedy(const Eigen::VectorXd& q, double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw ContractViolation("epsilon must lie in [0, 1]");
  if (q.size() == 0) throw ContractViolation("policy: empty frontier");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(q.size()) - 1);
    return pick(rng);
  }
  return argmax_first(q);
}

Eigen::MatrixXd frontier_phi(const ExplorationState& es, const NormalizedAlphabet& alphabet) {
  const auto& f = es.frontier();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(f.size()),
                       static_cast<Eigen::Index>(phi_dim(alphabet.size())));
  std::vector<std::vector<std::size_t>> paths(es.num_nodes());
  std::vector<char> have(es.num_nodes(), 0);
  Eigen::VectorXd edge(static_cast<Eigen::Index>(edge_feature_dim(alphabet.size())));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const NodeId src = es.transition(f[i]).source;
    if (!have[src]) {
      paths[src] = discovery_path_labels(es, src, alphabet);
      have[src] = 1;
    }
    const auto r = static_cast<Eigen::Index>(i);
    rows.row(r).head(kNodeFeatureDim) = node_features(es, src).transpose();
    detail::fill_edge_features(es, f[i], alphabet, paths[src], edge.data());
    rows.row(r).tail(edge.size()) = edge.transpose();
  }
  return rows;
}

Eigen::VectorXd baseline_qvalues(const ExplorationState& es, const BaselineQNet& net,
                                 const NormalizedAlphabet& alphabet) {
  return neural::mlp_forward(net, frontier_phi(es, alphabet));
}

BaselineRlPolicy::BaselineRlPolicy(BaselineWeights weights, double epsilon)
    : weights_(std::move(weights)), alphabet_(weights_.alphabet), epsilon_(epsilon) {
  if (weights_.net.in_dim() != static_cast<Eigen::Index>(phi_dim(alphabet_.size()))) {
    throw ContractViolation("rl policy: network input does not match the alphabet");
  }
}

void BaselineRlPolicy::prepare(const CompositeModel& model) { alphabet_.bind(model); }

TransitionId BaselineRlPolicy::select(const ExplorationState& es, Rng& rng) {
  require_frontier(es);
  return es.frontier()[epsilon_greedy(baseline_qvalues(es, weights_.net, alphabet_), epsilon_, rng)];
}

Eigen::VectorXd graph_qvalues(const GnnModel& model, const GraphEncoding& g,
                              std::optional<std::size_t> hops, neural::GnnCache<double>* cache) {
  if (g.frontier.empty()) return {};
  const GraphEncoding* input = &g;
  Subgraph sub;
  if (hops) {
    sub = khop_subgraph(g, frontier_endpoints(g), *hops);
    input = &sub.graph;
  }
  const auto n = static_cast<Eigen::Index>(input->num_nodes());
  const auto a = neural::propagation_matrix<double>(n, input->edges, model.aggregation);
  const Eigen::MatrixXd x = input->node_features;
  const Eigen::MatrixXd h = neural::gcn_forward(model, x, a, cache);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  Eigen::MatrixXd feats(static_cast<Eigen::Index>(input->frontier.size()),
                        input->edge_features.cols());
  for (std::size_t i = 0; i < input->frontier.size(); ++i) {
    const auto e = input->frontier[i];
    pairs.emplace_back(input->edges[e].source, input->edges[e].target);
    feats.row(static_cast<Eigen::Index>(i)) = input->edge_features.row(static_cast<Eigen::Index>(e));
  }
  if (input->frontier.size() != g.frontier.size()) {
    throw std::logic_error("k-hop neighborhood lost a frontier edge");
  }
  return neural::edge_scores(model, h, feats, pairs, cache);
}

Eigen::VectorXd gcrl_qvalues(const ExplorationState& es, const GnnModel& model,
                             const NormalizedAlphabet& alphabet, std::optional<std::size_t> hops) {
  return graph_qvalues(model, build_graph(es, alphabet), hops);
}

GcrlPolicy::GcrlPolicy(GnnWeights weights, std::size_t hops, double epsilon)
    : weights_(std::move(weights)), alphabet_(weights_.alphabet), hops_(hops), epsilon_(epsilon) {
  if (weights_.model.node_dim() != static_cast<Eigen::Index>(kNodeFeatureDim) ||
      weights_.model.edge_dim() != static_cast<Eigen::Index>(edge_feature_dim(alphabet_.size()))) {
    throw ContractViolation("gcrl policy: network dimensions do not match the alphabet");
  }
}

void GcrlPolicy::prepare(const CompositeModel& model) { alphabet_.bind(model); }

TransitionId GcrlPolicy::select(const ExplorationState& es, Rng& rng) {
  require_frontier(es);
  const auto q = gcrl_qvalues(es, weights_.model, alphabet_, hops_);
  return es.frontier()[epsilon_greedy(q, epsilon_, rng)];
}

PolicySpec parse_policy_spec(std::string_view text) {
  PolicySpec spec;
  auto bad = [&] { return ContractViolation("invalid policy spec: " + std::string(text)); };
  if (text == "random") {
    spec.kind = PolicySpec::Kind::Random;
  } else if (text == "bfs") {
    spec.kind = PolicySpec::Kind::Bfs;
  } else if (text == "dfs") {
    spec.kind = PolicySpec::Kind::Dfs;
  } else if (text == "ra") {
    spec.kind = PolicySpec::Kind::Ra;
  } else if (text.starts_with("rl:")) {
    spec.kind = PolicySpec::Kind::Rl;
    spec.weights_path = text.substr(3);
  } else if (text.starts_with("gcrl:")) {
    spec.kind = PolicySpec::Kind::Gcrl;
    std::string_view rest = text.substr(5);
    const auto colon = rest.rfind(':');
    if (colon != std::string_view::npos) {
      const auto digits = rest.substr(colon + 1);
      std::size_t k = 0;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
      if (!digits.empty() && ec == std::errc() && ptr == digits.data() + digits.size()) {
        spec.hops = k;
        rest = rest.substr(0, colon);
      }
    }
    spec.weights_path = rest;
  } else {
    throw bad();
  }
  if ((spec.kind == PolicySpec::Kind::Rl || spec.kind == PolicySpec::Kind::Gcrl) &&
      spec.weights_path.empty()) {
    throw bad();
  }
  return spec;
}

std::unique_ptr<ExplorationPolicy> make_policy(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicySpec::Kind::Random: return std::make_unique<RandomPolicy>();
    case PolicySpec::Kind::Bfs: return std::make_unique<BfsPolicy>();
    case PolicySpec::Kind::Dfs: return std::make_unique<DfsPolicy>();
    case PolicySpec::Kind::Ra: return std::make_unique<RaPolicy>();
    case PolicySpec::Kind::Rl:
      return std::make_unique<BaselineRlPolicy>(load_baseline_weights(spec.weights_path));
    case PolicySpec::Kind::Gcrl:
      return std::make_unique<GcrlPolicy>(load_gnn_weights(spec.weights_path), spec.hops);
  }
  throw ContractViolation("unknown policy kind");
}

}  // namespace dcs
