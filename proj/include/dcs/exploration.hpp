#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "dcs/lts.hpp"

namespace dcs {

/// Interned plant state id, dense in order of first sight.
using NodeId = std::uint32_t;
/// Index into the enumerated-transition table of an ExplorationState.
using TransitionId = std::uint32_t;

enum class Classification : std::uint8_t { Undecided, Winning, Losing };

struct ExploredTransition {
  NodeId source = 0;
  LabelId label = 0;
  NodeId target = 0;
  bool controllable = false;
};

struct PhaseFlags {
  bool marked_found = false;
  bool winning_exists = false;
  bool losing_exists = false;

  friend bool operator==(const PhaseFlags&, const PhaseFlags&) = default;
};

/// Working set of on-the-fly synthesis for one run.
///
/// Successors of a state are enumerated when it is discovered, so the
/// frontier is always (enumerated transitions of discovered states) \ h.
/// Frontier and transition ids follow the canonical order: discovery order
/// of the source, then (label, target).
///
/// Classification is recomputed as a full fixpoint over the explored region
/// after every expansion:
///   Losing (least fixpoint): a state with an expanded uncontrollable
///   transition into a Losing state; or an unmarked state that cannot reach,
///   through expanded transitions between non-Losing states, a marked state
///   or a state with an unexpanded transition.
///   Winning (greatest fixpoint): the largest set G of non-Losing discovered
///   states whose uncontrollable transitions are all expanded and lead into
///   G, and from which a marked state of G is reachable inside G.
/// Both are final once assigned.
class ExplorationState {
 public:
  /// Discovers the initial state and runs a first classification pass.
  explicit ExplorationState(const CompositeModel& model);

  const CompositeModel& model() const { return *model_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  const PlantState& plant_state(NodeId n) const { return interner_.state(n); }
  /// Node id of an interned plant state, if it has been seen.
  std::optional<NodeId> find_node(const PlantState& s) const;
  NodeId initial() const { return 0; }

  bool is_discovered(NodeId n) const { return nodes_.at(n).discovered; }
  bool is_marked(NodeId n) const { return nodes_.at(n).marked; }
  Classification classification(NodeId n) const { return nodes_.at(n).classification; }
  /// Position of n in discovery order; only meaningful for discovered nodes.
  std::size_t discovery_index(NodeId n) const { return nodes_.at(n).discovery_index; }
  const std::vector<NodeId>& discovery_order() const { return discovery_order_; }
  /// The expanded transition that discovered n (none for the initial state).
  std::optional<TransitionId> discovery_parent(NodeId n) const;
  /// Enumerated outgoing transitions (discovered nodes only).
  const std::vector<TransitionId>& successors(NodeId n) const { return nodes_.at(n).out; }
  std::size_t expanded_out(NodeId n) const { return nodes_.at(n).expanded_out; }
  bool has_uncontrollable_out(NodeId n) const { return nodes_.at(n).uncontrollable_out; }

  std::size_t num_transitions() const { return transitions_.size(); }
  const ExploredTransition& transition(TransitionId t) const { return transitions_.at(t); }
  bool is_expanded(TransitionId t) const { return expanded_.at(t); }

  const std::vector<TransitionId>& history() const { return history_; }
  /// Unexpanded transitions with discovered sources, ascending id.
  const std::vector<TransitionId>& frontier() const { return frontier_; }
  bool in_frontier(TransitionId t) const;

  std::optional<TransitionId> last_expanded() const;
  /// Node discovered by the most recent step (the initial state before any
  /// expansion), if that step discovered one.
  std::optional<NodeId> just_discovered() const { return just_discovered_; }

  const PhaseFlags& phase() const { return phase_; }
  std::size_t expansions() const { return history_.size(); }

  bool decided() const { return classification(initial()) != Classification::Undecided; }

  /// Marks n discovered, enumerates its successors into the frontier and
  /// records the discovery parent. Throws ContractViolation if n is already
  /// discovered.
  void discover(NodeId n, std::optional<TransitionId> parent = std::nullopt);

  /// Moves `t` from the frontier to the history, discovers its target when
  /// new and reclassifies. Throws ContractViolation if t is not in the frontier.
  void expand(TransitionId t);

  /// Recomputes the Winning/Losing fixpoints over the explored region.
  void classify_pass();

 private:
  struct Node {
    bool marked = false;
    bool discovered = false;
    bool uncontrollable_out = false;
    Classification classification = Classification::Undecided;
    std::size_t discovery_index = 0;
    std::int64_t parent = -1;
    std::size_t expanded_out = 0;
    std::vector<TransitionId> out;
    std::vector<TransitionId> in_expanded;
  };

  NodeId intern(const PlantState& s);
  void compute_losing();
  void compute_winning();
  void set_class(NodeId n, Classification c);

  const CompositeModel* model_;
  StateInterner interner_;
  std::vector<Node> nodes_;
  std::vector<ExploredTransition> transitions_;
  std::vector<bool> expanded_;
  std::vector<TransitionId> history_;
  std::vector<TransitionId> frontier_;
  std::vector<NodeId> discovery_order_;
  std::optional<NodeId> just_discovered_;
  PhaseFlags phase_;
};

}  // namespace dcs
