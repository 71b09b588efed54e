#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dcs/exploration.hpp"

namespace dcs {

/// Strips trailing `_<digits>` and `.<digits>` segments: "put_3" -> "put",
/// "step_2_1" -> "step".
std::string normalize_label(std::string_view label);

/// Sorted base labels of a model, independent of instance indices.
class NormalizedAlphabet {
 public:
  NormalizedAlphabet() = default;
  explicit NormalizedAlphabet(const CompositeModel& model);
  explicit NormalizedAlphabet(std::vector<std::string> base_labels);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Position of a global label's base name. Throws ContractViolation if the
  /// base name is not part of this alphabet.
  std::size_t index_of(LabelId label) const;
  /// Binds the alphabet to a model; must be called before index_of.
  void bind(const CompositeModel& model);

  friend bool operator==(const NormalizedAlphabet& a, const NormalizedAlphabet& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::ptrdiff_t> global_to_base_;
};

/// Node feature layout (F_n = 7):
///   0 just explored, 1 explored ratio, 2 has uncontrollable outgoing,
///   3 marked, 4..6 phase (marked found, winning exists, losing exists).
inline constexpr std::size_t kNodeFeatureDim = 7;

/// Edge feature layout (F_e = 2|A| + 12):
///   [0, |A|) label one-hot, [|A|, 2|A|) discovery-path labels multi-hot,
///   then controllable, leads to marked, 3 phase bits, 4 child classes
///   (win, loss, undecided, unexplored), child has uncontrollable,
///   child explored, source is last expanded.
inline constexpr std::size_t edge_feature_dim(std::size_t alphabet_size) {
  return 2 * alphabet_size + 12;
}
inline constexpr std::size_t phi_dim(std::size_t alphabet_size) {
  return kNodeFeatureDim + edge_feature_dim(alphabet_size);
}

using FeatureVector = Eigen::VectorXd;

/// Features of a discovered node.
FeatureVector node_features(const ExplorationState& es, NodeId node);
/// Features of a frontier target that has not been discovered yet: only the
/// phase bits are set.
FeatureVector placeholder_node_features(const ExplorationState& es);

/// Features of a transition in h ∪ F.
FeatureVector edge_features(const ExplorationState& es, TransitionId t,
                            const NormalizedAlphabet& alphabet);

/// Flat state-action features: [node_features(source) ‖ edge_features(t)].
/// Throws ContractViolation if t is not in the frontier.
FeatureVector phi(const ExplorationState& es, TransitionId t, const NormalizedAlphabet& alphabet);

/// Normalized labels on the discovery-tree path from the initial state to n.
std::vector<std::size_t> discovery_path_labels(const ExplorationState& es, NodeId n,
                                               const NormalizedAlphabet& alphabet);

namespace detail {
/// Writes edge_features(t) into out[0, F_e) given the source's path labels.
void fill_edge_features(const ExplorationState& es, TransitionId t,
                        const NormalizedAlphabet& alphabet,
                        const std::vector<std::size_t>& source_path, double* out);
}  // namespace detail

}  // namespace dcs
