#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dcs {

using LocalState = std::uint32_t;
using LabelId = std::uint32_t;

/// Raised when an API is called outside its documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a model is structurally invalid (bad label partition, dangling ids).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an explicit construction would exceed its state budget.
class StateBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One component of a modular plant: a DES (S, A = A^C ∪ A^U, D, s0, M).
///
/// Labels are stored by name in `alphabet` (sorted, unique); transitions
/// refer to positions in that vector. The transition relation may be
/// nondeterministic.
struct Automaton {
  struct Transition {
    LocalState source = 0;
    std::uint32_t label = 0;  // index into alphabet
    LocalState target = 0;

    friend bool operator==(const Transition&, const Transition&) = default;
    friend auto operator<=>(const Transition&, const Transition&) = default;
  };

  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> alphabet;
  std::vector<bool> controllable;  // aligned with alphabet
  std::vector<Transition> transitions;
  LocalState initial = 0;
  std::vector<bool> marked;  // aligned with states

  std::size_t num_states() const { return states.size(); }

  /// Position of `label` in the alphabet, or -1.
  std::ptrdiff_t label_index(std::string_view label) const;

  /// Throws ModelError when an invariant of the 5-tuple does not hold.
  void validate() const;

  friend bool operator==(const Automaton&, const Automaton&) = default;
};

/// Composite state: one local state per component.
struct PlantState {
  std::vector<LocalState> locals;

  std::size_t arity() const { return locals.size(); }

  friend bool operator==(const PlantState&, const PlantState&) = default;
  friend auto operator<=>(const PlantState&, const PlantState&) = default;
};

struct PlantStateHash {
  std::size_t operator()(const PlantState& s) const noexcept;
};

struct PlantTransition {
  PlantState source;
  LabelId label = 0;
  PlantState target;
  bool controllable = false;

  friend bool operator==(const PlantTransition&, const PlantTransition&) = default;
};

/// Ordered list of components whose parallel composition is the plant.
///
/// Global labels are sorted by name, so ordering by LabelId is ordering by
/// label string. Immutable after construction.
class CompositeModel {
 public:
  CompositeModel() = default;

  /// Validates every component and the global controllable partition.
  explicit CompositeModel(std::vector<Automaton> components);

  const std::vector<Automaton>& components() const { return components_; }
  std::size_t num_components() const { return components_.size(); }

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }
  const std::string& label_name(LabelId id) const { return labels_.at(id); }
  bool is_controllable(LabelId id) const { return controllable_.at(id); }
  /// Throws ModelError if absent.
  LabelId label_id(std::string_view name) const;

  PlantState initial_state() const;

  /// Components whose alphabet contains the global label.
  const std::vector<std::uint32_t>& participants(LabelId id) const {
    return participants_.at(id);
  }

  struct LocalEdge {
    LabelId label;
    LocalState target;
  };
  /// Outgoing edges of a component's local state, sorted by (label, target).
  const std::vector<LocalEdge>& local_out(std::size_t component,
                                          LocalState state) const {
    return local_out_[component][state];
  }

  friend bool operator==(const CompositeModel& a, const CompositeModel& b) {
    return a.components_ == b.components_;
  }

 private:
  std::vector<Automaton> components_;
  std::vector<std::string> labels_;
  std::vector<bool> controllable_;
  std::vector<std::vector<std::uint32_t>> participants_;
  std::vector<std::vector<std::vector<LocalEdge>>> local_out_;
};

/// Enabled transitions of the synchronous product at `s`, sorted by
/// (label, target). Throws ContractViolation on invalid arity or local ids.
std::vector<PlantTransition> compose_successors(const CompositeModel& model,
                                                const PlantState& s);

/// True iff every component's local state is marked.
bool is_marked(const CompositeModel& model, const PlantState& s);

/// Dense ids for plant states, assigned in order of first sight.
class StateInterner {
 public:
  explicit StateInterner(std::size_t arity = 0) : arity_(arity) {}

  /// Returns {id, inserted}.
  std::pair<std::uint32_t, bool> intern(const PlantState& s);
  /// Id of `s`, or -1.
  std::int64_t find(const PlantState& s) const;
  const PlantState& state(std::uint32_t id) const { return states_.at(id); }
  std::size_t size() const { return states_.size(); }

 private:
  std::size_t arity_;
  std::vector<PlantState> states_;
  std::unordered_map<PlantState, std::uint32_t, PlantStateHash> ids_;
};

/// Fully materialized reachable product. State i of `automaton` is
/// `plant_states[i]`; state 0 is the initial state. Labels follow the
/// model's global table.
struct ExplicitProduct {
  Automaton automaton;
  std::vector<PlantState> plant_states;
};

/// Breadth-first materialization of the reachable product.
/// Throws StateBudgetExceeded if more than `max_states` states are reachable.
ExplicitProduct explicit_product(const CompositeModel& model,
                                 std::size_t max_states);

}  // namespace dcs
