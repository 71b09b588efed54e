#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "dcs/features.hpp"
#include "dcs/graph_encoding.hpp"
#include "dcs/neural.hpp"
#include "dcs/synthesis.hpp"

namespace dcs {

/// Uniform choice over the frontier.
class RandomPolicy final : public ExplorationPolicy {
 public:
  TransitionId select(const ExplorationState& es, Rng& rng) override;
  std::string name() const override { return "random"; }
};

/// Oldest source first: the first frontier transition in canonical order.
class BfsPolicy final : public ExplorationPolicy {
 public:
  TransitionId select(const ExplorationState& es, Rng& rng) override;
  std::string name() const override { return "bfs"; }
};

/// Newest source first; canonical order among its transitions.
class DfsPolicy final : public ExplorationPolicy {
 public:
  TransitionId select(const ExplorationState& es, Rng& rng) override;
  std::string name() const override { return "dfs"; }
};

inline constexpr std::size_t kUnknownDistance = std::numeric_limits<std::size_t>::max();

/// Per-component BFS distance from each local state to the nearest marked
/// local state of that component.
class GoalDistance {
 public:
  GoalDistance() = default;
  explicit GoalDistance(const CompositeModel& model);
  /// Max over components; kUnknownDistance if some component cannot reach a
  /// marked local state.
  std::size_t estimate(const PlantState& s) const;

 private:
  std::vector<std::vector<std::size_t>> local_;
};

/// Sort key of the three-level priority: uncontrollable before controllable,
/// among uncontrollable unknown distance first, then ascending distance
/// (unknown last), then canonical order.
struct RaKey {
  bool controllable = false;
  bool known_uncontrollable = false;
  std::size_t distance = kUnknownDistance;
  std::size_t canonical = 0;

  friend auto operator<=>(const RaKey& a, const RaKey& b) {
    return std::tie(a.controllable, a.known_uncontrollable, a.distance, a.canonical) <=>
           std::tie(b.controllable, b.known_uncontrollable, b.distance, b.canonical);
  }
  friend bool operator==(const RaKey&, const RaKey&) = default;
};

RaKey make_ra_key(bool controllable, std::size_t distance, std::size_t canonical);

class RaPolicy final : public ExplorationPolicy {
 public:
  void prepare(const CompositeModel& model) override;
  TransitionId select(const ExplorationState& es, Rng& rng) override;
  std::string name() const override { return "ra"; }

  RaKey key(const ExplorationState& es, TransitionId t, std::size_t canonical) const;

 private:
  GoalDistance distance_;
};

/// Q-values of the feature-vector network for every frontier transition, in
/// frontier order.
Eigen::VectorXd baseline_qvalues(const ExplorationState& es, const BaselineQNet& net,
                                 const NormalizedAlphabet& alphabet);

/// Stacked φ rows for the frontier, in frontier order.
Eigen::MatrixXd frontier_phi(const ExplorationState& es, const NormalizedAlphabet& alphabet);

/// Index of the first maximum.
std::size_t argmax_first(const Eigen::VectorXd& q);

class BaselineRlPolicy final : public ExplorationPolicy {
 public:
  explicit BaselineRlPolicy(BaselineWeights weights, double epsilon = 0.0);
  void prepare(const CompositeModel& model) override;
  TransitionId select(const ExplorationState& es, Rng& rng) override;
  std::string name() const override { return "rl"; }

  void set_epsilon(double e) { epsilon_ = e; }
  BaselineQNet& net() { return weights_.net; }

 private:
  BaselineWeights weights_;
  NormalizedAlphabet alphabet_;
  double epsilon_;
};

/// Scores of the frontier edges of `g` (aligned with g.frontier). With
/// `hops`, the network runs on the induced neighborhood of the frontier
/// endpoints; otherwise on the whole graph. Fills `cache` for backward.
Eigen::VectorXd graph_qvalues(const GnnModel& model, const GraphEncoding& g,
                              std::optional<std::size_t> hops,
                              neural::GnnCache<double>* cache = nullptr);

/// build_graph followed by graph_qvalues, aligned with es.frontier().
Eigen::VectorXd gcrl_qvalues(const ExplorationState& es, const GnnModel& model,
                             const NormalizedAlphabet& alphabet, std::optional<std::size_t> hops);

inline constexpr std::size_t kDefaultHops = 2;

class GcrlPolicy final : public ExplorationPolicy {
 public:
  GcrlPolicy(GnnWeights weights, std::size_t hops = kDefaultHops, double epsilon = 0.0);
  void prepare(const CompositeModel& model) override;
  TransitionId select(const ExplorationState& es, Rng& rng) override;
  std::string name() const override { return "gcrl"; }

  void set_epsilon(double e) { epsilon_ = e; }
  std::size_t hops() const { return hops_; }
  const GnnModel& model() const { return weights_.model; }

 private:
  GnnWeights weights_;
  NormalizedAlphabet alphabet_;
  std::size_t hops_;
  double epsilon_;
};

/// ε-greedy draw: uniform frontier position with probability ε, else
/// argmax_first(q). Consumes one uniform draw, plus one more when exploring.
std::size_t epsilon_greedy(const Eigen::VectorXd& q, double epsilon, Rng& rng);

struct PolicySpec {
  enum class Kind { Random, Bfs, Dfs, Ra, Rl, Gcrl } kind = Kind::Random;
  std::string weights_path;
  std::size_t hops = kDefaultHops;
};

/// Parses `random`, `bfs`, `dfs`, `ra`, `rl:<path>`, `gcrl:<path>[:k]`.
/// Throws ContractViolation on anything else.
PolicySpec parse_policy_spec(std::string_view text);

/// Instantiates a policy, loading weights when needed.
std::unique_ptr<ExplorationPolicy> make_policy(const PolicySpec& spec);

}  // namespace dcs
