#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "dcs/exploration.hpp"
#include "dcs/lts.hpp"

namespace dcs {

using Rng = std::mt19937_64;

/// Frontier-selection strategy driving on-the-fly synthesis.
class ExplorationPolicy {
 public:
  virtual ~ExplorationPolicy() = default;
  /// Called once per run before the first selection.
  virtual void prepare(const CompositeModel& /*model*/) {}
  /// Returns a member of es.frontier(). The frontier is nonempty.
  virtual TransitionId select(const ExplorationState& es, Rng& rng) = 0;
  virtual std::string name() const = 0;
};

/// Director: at most one enabled controllable event per winning state.
struct Director {
  std::map<PlantState, std::optional<LabelId>> choice;
};

struct Verdict {
  bool realizable = false;
  bool decided = false;
  std::size_t expansions = 0;
  std::optional<Director> director;
};

/// Default expansion budget of evaluation runs.
inline constexpr std::size_t kDefaultBudget = 5000;

/// Runs the discover/select/expand/classify loop until the initial state is
/// decided, the frontier is exhausted, or `budget` expansions were made.
Verdict run_dcs(const CompositeModel& model, ExplorationPolicy& policy, std::size_t budget,
                std::uint64_t seed);

/// Same loop over an existing state; returns when decided, exhausted or at
/// budget. Used by trainers that need to observe every decision.
Verdict run_dcs(ExplorationState& es, ExplorationPolicy& policy, std::size_t budget, Rng& rng);

/// Director over the Winning states of `es`: each state designates the first
/// transition of a shortest path to a marked winning state (lowest label on
/// ties); the choice is that label if controllable, none otherwise.
/// Throws std::logic_error if the initial state is not Winning or the result
/// fails closed-loop validation.
Director extract_director(const ExplorationState& es);

/// Closed-loop check against the full plant: every reachable state has a
/// choice, no unmarked deadlock, and a marked state stays reachable from
/// every reachable state. Returns an error description, or nullopt if valid.
std::optional<std::string> validate_director(const CompositeModel& model, const Director& d);

/// Synthesis over the explicit product by alternating fixpoint.
/// Throws StateBudgetExceeded if the product has more than max_states states.
Verdict monolithic_oracle(const CompositeModel& model, std::size_t max_states);

nlohmann::json verdict_to_json(const Verdict& v, std::uint64_t seed, const std::string& policy,
                               const std::string& instance);

}  // namespace dcs
