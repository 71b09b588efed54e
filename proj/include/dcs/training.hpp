#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcs/benchmarks.hpp"
#include "dcs/neural.hpp"
#include "dcs/policies.hpp"

namespace dcs {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LearnerKind { Gcrl, Baseline };

struct TrainConfig {
  LearnerKind learner = LearnerKind::Gcrl;
  int n = 2;
  int k = 2;
  std::size_t episodes = 100;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  /// Episode e of E explores with start + (end - start) (e - 1) / (E - 1)
  /// throughout. When false, ε decays per environment step instead.
  bool epsilon_per_episode = true;
  /// Steps over which the per-step schedule decays; 0 estimates it as
  /// `episodes` times the mean length of random-policy probe episodes.
  std::size_t epsilon_decay_steps = 0;
  std::size_t probe_episodes = 5;
  double gamma = 1.0;
  std::size_t replay_capacity = 1000;
  std::size_t batch_size = 32;
  std::size_t target_sync = 200;
  double learning_rate = 1e-3;
  double max_grad_norm = 10.0;
  std::size_t hops = kDefaultHops;
  std::size_t hidden = kDefaultHidden;
  std::size_t mlp_hidden = kDefaultMlpHidden;
  neural::Aggregation aggregation = neural::Aggregation::Normalized;
  /// Expansion cap of a single training episode.
  std::size_t episode_budget = kDefaultBudget;
  std::uint64_t seed = 0;
  std::size_t repeats = 5;

  /// Throws ContractViolation on a non-positive size or ε_end > ε_start.
  void validate() const;
};

nlohmann::json config_to_json(const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig config_from_json(const nlohmann::json& j);
/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const TrainConfig& c);

/// Linear ε schedule from start (step 0) to end (step `decay_steps` and after).
double epsilon_at(std::size_t step, double start, double end, std::size_t decay_steps);

/// Fixed-capacity FIFO of transitions; pushing into a full buffer evicts the
/// oldest item.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ContractViolation("replay buffer capacity must be positive");
  }

  void push(T item) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(item));
  }

  /// Uniform draw with replacement.
  template <typename Rng>
  T& sample(Rng& rng) {
    if (items_.empty()) throw ContractViolation("sampling an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    return items_[pick(rng)];
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const T& operator[](std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
};

struct EpisodeLog {
  std::size_t episode = 0;
  std::size_t expansions = 0;
  double episode_return = 0;
  double epsilon = 0;    ///< at the first step of the episode
  double loss_mean = 0;  ///< NaN when no gradient step ran
};

using Snapshot = std::variant<GnnWeights, BaselineWeights>;

struct TrainResult {
  std::vector<EpisodeLog> log;
  std::vector<Snapshot> snapshots;  ///< one per episode
  std::vector<std::filesystem::path> snapshot_files;
  std::size_t epsilon_decay_steps = 0;
  std::size_t gradient_steps = 0;
};

/// Observation of one gradient step, for instrumentation.
struct GradientStepInfo {
  std::size_t step = 0;       ///< 1-based gradient step index
  bool target_synced = false;  ///< target network copied after this step
  double online_checksum = 0;  ///< sum of online parameters after the update
  double target_checksum = 0;  ///< sum of the target parameters used for this step
  std::size_t replay_size = 0;
};

struct TrainHooks {
  std::function<void(const GradientStepInfo&)> on_gradient_step;
};

/// DQN on generate_benchmark({domain, c.n, c.k}) with reward −1 per
/// expansion. Writes `snapshot_<episode>.json` per episode into `out_dir`
/// when given. Throws TrainingError on a non-finite loss.
TrainResult train(Domain domain, const TrainConfig& config,
                  const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                  const TrainHooks& hooks = {});

/// Signed sum of episode returns.
double auc(const std::vector<EpisodeLog>& log);

void write_training_csv(std::ostream& out, const std::vector<EpisodeLog>& log,
                        std::uint64_t seed, const std::string& config_hash);

/// Policy instance evaluating a snapshot greedily.
std::unique_ptr<ExplorationPolicy> snapshot_policy(const Snapshot& s, std::size_t hops);

struct EvalRecord {
  std::string domain;
  int n = 0;
  int k = 0;
  std::string policy;
  bool solved = false;
  std::size_t expansions = 0;
  double millis = 0;
  std::uint64_t seed = 0;
};

/// Fresh policy per instance.
using PolicyFactory = std::function<std::unique_ptr<ExplorationPolicy>()>;

struct GridResult {
  std::vector<EvalRecord> records;
  std::size_t solved = 0;
};

/// Visits (n, k) in nondecreasing n + k (then n) from (1, 1); an instance is
/// attempted only when its lower neighbors within the grid were solved.
GridResult eval_grid(const PolicyFactory& factory, const std::string& policy_id, Domain domain,
                     int max_n, int max_k, std::size_t budget, std::uint64_t seed);

void write_eval_csv(std::ostream& out, const std::vector<EvalRecord>& records,
                    std::uint64_t seed);

struct SnapshotScore {
  std::size_t solved = 0;
  std::size_t expansions = 0;  ///< summed over the validation set
};

/// Index of the best score: most solved, then fewest expansions, then the
/// latest index.
std::size_t best_snapshot(const std::vector<SnapshotScore>& scores);

struct SelectionResult {
  std::size_t index = 0;
  /// Per snapshot; nullopt when evaluation stopped once the snapshot could
  /// no longer win.
  std::vector<std::optional<SnapshotScore>> scores;
};

inline constexpr std::size_t kValidationBudget = 1000;

/// Validation instances (3,3), (4,4), (5,5) of `domain`.
std::vector<BenchmarkSpec> validation_set(Domain domain);

/// Evaluates snapshots (latest first) on the validation set and returns the
/// one best_snapshot would choose over the complete score matrix.
SelectionResult select_snapshot(const std::vector<Snapshot>& snapshots,
                                const std::vector<BenchmarkSpec>& validation, std::size_t budget,
                                std::size_t hops, std::uint64_t seed);

}  // namespace dcs
