#include "dcs/features.hpp"

#include <algorithm>
#include <cctype>

namespace dcs {

std::string normalize_label(std::string_view label) {
  std::size_t end = label.size();
  while (end > 0) {
    std::size_t i = end;
    while (i > 0 && std::isdigit(static_cast<unsigned char>(label[i - 1]))) --i;
    if (i == end || i < 2 || (label[i - 1] != '_' && label[i - 1] != '.')) break;
    end = i - 1;
  }
  return std::string(label.substr(0, end));
}

NormalizedAlphabet::NormalizedAlphabet(const CompositeModel& model) {
  for (LabelId l = 0; l < model.labels().size(); ++l) {
    labels_.push_back(normalize_label(model.label_name(l)));
  }
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  bind(model);
}

NormalizedAlphabet::NormalizedAlphabet(std::vector<std::string> base_labels)
    : labels_(std::move(base_labels)) {
  if (!std::is_sorted(labels_.begin(), labels_.end()) ||
      std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end()) {
    throw ContractViolation("normalized alphabet must be sorted and free of duplicates");
  }
}

void NormalizedAlphabet::bind(const CompositeModel& model) {
  global_to_base_.assign(model.labels().size(), -1);
  for (LabelId l = 0; l < model.labels().size(); ++l) {
    const auto base = normalize_label(model.label_name(l));
    auto it = std::lower_bound(labels_.begin(), labels_.end(), base);
    if (it != labels_.end() && *it == base) global_to_base_[l] = it - labels_.begin();
  }
}

std::size_t NormalizedAlphabet::index_of(LabelId label) const {
  if (label >= global_to_base_.size() || global_to_base_[label] < 0) {
    throw ContractViolation("label is not part of the normalized alphabet");
  }
  return static_cast<std::size_t>(global_to_base_[label]);
}

namespace {

void write_phase(const PhaseFlags& p, double* out) {
  out[0] = p.marked_found;
  out[1] = p.winning_exists;
  out[2] = p.losing_exists;
}

}  // namespace

FeatureVector node_features(const ExplorationState& es, NodeId node) {
  FeatureVector f = FeatureVector::Zero(kNodeFeatureDim);
  if (!es.is_discovered(node)) {
    write_phase(es.phase(), f.data() + 4);
    return f;
  }
  f[0] = es.just_discovered() == node;
  const auto enumerated = es.successors(node).size();
  f[1] = enumerated == 0 ? 0.0 : static_cast<double>(es.expanded_out(node)) / enumerated;
  f[2] = es.has_uncontrollable_out(node);
  f[3] = es.is_marked(node);
  write_phase(es.phase(), f.data() + 4);
  return f;
}

FeatureVector placeholder_node_features(const ExplorationState& es) {
  FeatureVector f = FeatureVector::Zero(kNodeFeatureDim);
  write_phase(es.phase(), f.data() + 4);
  return f;
}

std::vector<std::size_t> discovery_path_labels(const ExplorationState& es, NodeId n,
                                               const NormalizedAlphabet& alphabet) {
  std::vector<std::size_t> labels;
  for (auto p = es.discovery_parent(n); p; p = es.discovery_parent(es.transition(*p).source)) {
    labels.push_back(alphabet.index_of(es.transition(*p).label));
  }
  std::reverse(labels.begin(), labels.end());
  return labels;
}

namespace detail {

void fill_edge_features(const ExplorationState& es, TransitionId t,
                        const NormalizedAlphabet& alphabet,
                        const std::vector<std::size_t>& source_path, double* out) {
  const std::size_t a = alphabet.size();
  const auto& tr = es.transition(t);
  std::fill(out, out + edge_feature_dim(a), 0.0);
  out[alphabet.index_of(tr.label)] = 1.0;
  for (auto l : source_path) out[a + l] = 1.0;
  double* tail = out + 2 * a;
  tail[0] = tr.controllable;
  tail[1] = es.is_marked(tr.target);
  write_phase(es.phase(), tail + 2);
  const bool child_discovered = es.is_discovered(tr.target);
  if (!child_discovered) {
    tail[8] = 1.0;
  } else {
    switch (es.classification(tr.target)) {
      case Classification::Winning: tail[5] = 1.0; break;
      case Classification::Losing: tail[6] = 1.0; break;
      case Classification::Undecided: tail[7] = 1.0; break;
    }
  }
  tail[9] = child_discovered && es.has_uncontrollable_out(tr.target);
  tail[10] = child_discovered;
  const auto last = es.last_expanded();
  tail[11] = last && es.transition(*last).target == tr.source;
}

}  // namespace detail

FeatureVector edge_features(const ExplorationState& es, TransitionId t,
                            const NormalizedAlphabet& alphabet) {
  if (!es.is_expanded(t) && !es.in_frontier(t)) {
    throw ContractViolation("edge_features: transition is neither in the history nor the frontier");
  }
  FeatureVector f(edge_feature_dim(alphabet.size()));
  detail::fill_edge_features(es, t, alphabet,
                             discovery_path_labels(es, es.transition(t).source, alphabet), f.data());
  return f;
}

FeatureVector phi(const ExplorationState& es, TransitionId t, const NormalizedAlphabet& alphabet) {
  if (!es.in_frontier(t)) throw ContractViolation("phi: transition is not in the frontier");
  FeatureVector f(phi_dim(alphabet.size()));
  f.head(kNodeFeatureDim) = node_features(es, es.transition(t).source);
  f.tail(edge_feature_dim(alphabet.size())) = edge_features(es, t, alphabet);
  return f;
}

}  // namespace dcs
