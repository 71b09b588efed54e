#include "dcs/lts.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace dcs {

std::ptrdiff_t Automaton::label_index(std::string_view label) const {
  auto it = std::lower_bound(alphabet.begin(), alphabet.end(), label);
  if (it == alphabet.end() || *it != label) return -1;
  return it - alphabet.begin();
}

void Automaton::validate() const {
  if (states.empty()) throw ModelError("component '" + name + "' has no states");
  if (!std::is_sorted(alphabet.begin(), alphabet.end()) ||
      std::adjacent_find(alphabet.begin(), alphabet.end()) != alphabet.end()) {
    throw ModelError("component '" + name + "' alphabet is not sorted and unique");
  }
  if (controllable.size() != alphabet.size()) {
    throw ModelError("component '" + name + "' controllable flags do not match alphabet");
  }
  if (marked.size() != states.size()) {
    throw ModelError("component '" + name + "' marked flags do not match states");
  }
  if (initial >= states.size()) {
    throw ModelError("component '" + name + "' initial state out of range");
  }
  for (const auto& t : transitions) {
    if (t.source >= states.size() || t.target >= states.size()) {
      throw ModelError("component '" + name + "' has a transition with a dangling state");
    }
    if (t.label >= alphabet.size()) {
      throw ModelError("component '" + name + "' has a transition with an unknown label");
    }
  }
}

std::size_t PlantStateHash::operator()(const PlantState& s) const noexcept {
  // FNV-1a over the local ids.
  std::size_t h = 1469598103934665603ULL;
  for (LocalState v : s.locals) {
    h ^= v;
    h *= 1099511628211ULL;
  }
  return h;
}

CompositeModel::CompositeModel(std::vector<Automaton> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ModelError("composition has no components");

  std::map<std::string, bool> partition;
  for (const auto& c : components_) {
    c.validate();
    for (std::size_t i = 0; i < c.alphabet.size(); ++i) {
      auto [it, inserted] = partition.emplace(c.alphabet[i], c.controllable[i]);
      if (!inserted && it->second != c.controllable[i]) {
        throw ModelError("inconsistent controllability for label '" + c.alphabet[i] + "'");
      }
    }
  }
  for (const auto& [label, ctrl] : partition) {
    labels_.push_back(label);
    controllable_.push_back(ctrl);
  }
  participants_.resize(labels_.size());
  local_out_.resize(components_.size());
  for (std::size_t ci = 0; ci < components_.size(); ++ci) {
    const auto& c = components_[ci];
    std::vector<LabelId> to_global(c.alphabet.size());
    for (std::size_t i = 0; i < c.alphabet.size(); ++i) {
      to_global[i] = label_id(c.alphabet[i]);
      participants_[to_global[i]].push_back(static_cast<std::uint32_t>(ci));
    }
    auto& out = local_out_[ci];
    out.resize(c.num_states());
    for (const auto& t : c.transitions) {
      out[t.source].push_back({to_global[t.label], t.target});
    }
    for (auto& edges : out) {
      std::sort(edges.begin(), edges.end(), [](const LocalEdge& a, const LocalEdge& b) {
        return a.label != b.label ? a.label < b.label : a.target < b.target;
      });
      edges.erase(std::unique(edges.begin(), edges.end(),
                              [](const LocalEdge& a, const LocalEdge& b) {
                                return a.label == b.label && a.target == b.target;
                              }),
                  edges.end());
    }
  }
}

LabelId CompositeModel::label_id(std::string_view name) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), name);
  if (it == labels_.end() || *it != name) {
    throw ModelError("unknown label '" + std::string(name) + "'");
  }
  return static_cast<LabelId>(it - labels_.begin());
}

PlantState CompositeModel::initial_state() const {
  PlantState s;
  s.locals.reserve(components_.size());
  for (const auto& c : components_) s.locals.push_back(c.initial);
  return s;
}

namespace {

void check_state(const CompositeModel& model, const PlantState& s) {
  if (s.arity() != model.num_components()) {
    throw ContractViolation("plant state arity " + std::to_string(s.arity()) +
                            " does not match component count " +
                            std::to_string(model.num_components()));
  }
  for (std::size_t i = 0; i < s.arity(); ++i) {
    if (s.locals[i] >= model.components()[i].num_states()) {
      throw ContractViolation("local state out of range in component " + std::to_string(i));
    }
  }
}

}  // namespace

std::vector<PlantTransition> compose_successors(const CompositeModel& model,
                                                const PlantState& s) {
  check_state(model, s);

  // A label can only be enabled if some participant enables it locally.
  std::vector<LabelId> candidates;
  for (std::size_t ci = 0; ci < model.num_components(); ++ci) {
    for (const auto& e : model.local_out(ci, s.locals[ci])) candidates.push_back(e.label);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<PlantTransition> result;
  std::vector<std::vector<LocalState>> choices;
  for (LabelId label : candidates) {
    const auto& parts = model.participants(label);
    choices.assign(parts.size(), {});
    bool blocked = false;
    for (std::size_t p = 0; p < parts.size() && !blocked; ++p) {
      for (const auto& e : model.local_out(parts[p], s.locals[parts[p]])) {
        if (e.label == label) choices[p].push_back(e.target);
      }
      blocked = choices[p].empty();
    }
    if (blocked) continue;

    const std::size_t first = result.size();
    std::vector<std::size_t> odometer(parts.size(), 0);
    for (bool done = false; !done;) {
      PlantTransition t{s, label, s, model.is_controllable(label)};
      for (std::size_t p = 0; p < parts.size(); ++p) {
        t.target.locals[parts[p]] = choices[p][odometer[p]];
      }
      result.push_back(std::move(t));
      done = true;
      for (std::size_t p = parts.size(); p-- > 0;) {
        if (++odometer[p] < choices[p].size()) {
          done = false;
          break;
        }
        odometer[p] = 0;
      }
    }
    std::sort(result.begin() + static_cast<std::ptrdiff_t>(first), result.end(),
              [](const PlantTransition& a, const PlantTransition& b) {
                return a.target < b.target;
              });
  }
  return result;
}

bool is_marked(const CompositeModel& model, const PlantState& s) {
  check_state(model, s);
  for (std::size_t i = 0; i < s.arity(); ++i) {
    if (!model.components()[i].marked[s.locals[i]]) return false;
  }
  return true;
}

std::pair<std::uint32_t, bool> StateInterner::intern(const PlantState& s) {
  if (arity_ != 0 && s.arity() != arity_) {
    throw ContractViolation("interned state has wrong arity");
  }
  auto [it, inserted] = ids_.emplace(s, static_cast<std::uint32_t>(states_.size()));
  if (inserted) states_.push_back(s);
  return {it->second, inserted};
}

std::int64_t StateInterner::find(const PlantState& s) const {
  auto it = ids_.find(s);
  return it == ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

ExplicitProduct explicit_product(const CompositeModel& model, std::size_t max_states) {
  ExplicitProduct out;
  auto& a = out.automaton;
  a.name = "product";
  a.alphabet = model.labels();
  for (LabelId l = 0; l < model.num_labels(); ++l) a.controllable.push_back(model.is_controllable(l));

  StateInterner interner(model.num_components());
  interner.intern(model.initial_state());
  std::deque<std::uint32_t> queue{0};
  while (!queue.empty()) {
    std::uint32_t id = queue.front();
    queue.pop_front();
    const PlantState source = interner.state(id);
    for (const auto& t : compose_successors(model, source)) {
      auto [target, inserted] = interner.intern(t.target);
      if (inserted) {
        if (interner.size() > max_states) {
          throw StateBudgetExceeded("explicit product exceeds " + std::to_string(max_states) +
                                    " states");
        }
        queue.push_back(target);
      }
      a.transitions.push_back({id, t.label, target});
    }
  }
  out.plant_states.reserve(interner.size());
  for (std::uint32_t i = 0; i < interner.size(); ++i) {
    const auto& s = interner.state(i);
    out.plant_states.push_back(s);
    a.states.push_back("q" + std::to_string(i));
    a.marked.push_back(is_marked(model, s));
  }
  a.initial = 0;
  return out;
}

}  // namespace dcs
