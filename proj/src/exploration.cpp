#include "dcs/exploration.hpp"

#include <algorithm>
#include <stdexcept>

namespace dcs {

ExplorationState::ExplorationState(const CompositeModel& model)
    : model_(&model), interner_(model.num_components()) {
  const NodeId root = intern(model.initial_state());
  discover(root);
  just_discovered_ = root;
  classify_pass();
}

NodeId ExplorationState::intern(const PlantState& s) {
  auto [id, inserted] = interner_.intern(s);
  if (inserted) {
    Node node;
    node.marked = dcs::is_marked(*model_, s);
    nodes_.push_back(std::move(node));
  }
  return id;
}

std::optional<NodeId> ExplorationState::find_node(const PlantState& s) const {
  const auto id = interner_.find(s);
  if (id < 0) return std::nullopt;
  return static_cast<NodeId>(id);
}

std::optional<TransitionId> ExplorationState::discovery_parent(NodeId n) const {
  const auto p = nodes_.at(n).parent;
  if (p < 0) return std::nullopt;
  return static_cast<TransitionId>(p);
}

bool ExplorationState::in_frontier(TransitionId t) const {
  return std::binary_search(frontier_.begin(), frontier_.end(), t);
}

std::optional<TransitionId> ExplorationState::last_expanded() const {
  if (history_.empty()) return std::nullopt;
  return history_.back();
}

void ExplorationState::discover(NodeId n, std::optional<TransitionId> parent) {
  if (n >= nodes_.size()) throw ContractViolation("discover: unknown node");
  if (nodes_[n].discovered) throw ContractViolation("discover: node already discovered");
  nodes_[n].discovered = true;
  nodes_[n].discovery_index = discovery_order_.size();
  nodes_[n].parent = parent ? static_cast<std::int64_t>(*parent) : -1;
  discovery_order_.push_back(n);
  if (nodes_[n].marked) phase_.marked_found = true;

  // Copy: interning below may reallocate the interner's storage.
  const PlantState source = interner_.state(n);
  for (const auto& pt : compose_successors(*model_, source)) {
    const NodeId target = intern(pt.target);
    const auto id = static_cast<TransitionId>(transitions_.size());
    transitions_.push_back({n, pt.label, target, pt.controllable});
    expanded_.push_back(false);
    nodes_[n].out.push_back(id);
    if (!pt.controllable) nodes_[n].uncontrollable_out = true;
    // New ids are larger than every existing one, so the frontier stays sorted.
    frontier_.push_back(id);
  }
}

void ExplorationState::expand(TransitionId t) {
  auto it = std::lower_bound(frontier_.begin(), frontier_.end(), t);
  if (it == frontier_.end() || *it != t) {
    throw ContractViolation("expand: transition " + std::to_string(t) + " is not in the frontier");
  }
  frontier_.erase(it);
  expanded_[t] = true;
  history_.push_back(t);
  const NodeId source = transitions_[t].source;
  const NodeId target = transitions_[t].target;
  nodes_[source].expanded_out += 1;
  nodes_[target].in_expanded.push_back(t);
  just_discovered_.reset();
  if (!nodes_[target].discovered) {
    discover(target, t);
    just_discovered_ = target;
  }
  classify_pass();
}

void ExplorationState::set_class(NodeId n, Classification c) {
  auto& node = nodes_[n];
  if (node.classification == c) return;
  if (node.classification != Classification::Undecided) {
    throw std::logic_error("classification of a decided state changed");
  }
  node.classification = c;
  if (c == Classification::Winning) phase_.winning_exists = true;
  if (c == Classification::Losing) phase_.losing_exists = true;
}

void ExplorationState::classify_pass() {
  compute_losing();
  compute_winning();
}

void ExplorationState::compute_losing() {
  auto losing = [&](NodeId n) { return nodes_[n].classification == Classification::Losing; };
  std::vector<char> alive(nodes_.size());
  std::vector<NodeId> stack;
  for (bool changed = true; changed;) {
    changed = false;
    // Uncontrollable contagion.
    for (NodeId s : discovery_order_) {
      if (losing(s)) continue;
      for (TransitionId t : nodes_[s].out) {
        const auto& tr = transitions_[t];
        if (expanded_[t] && !tr.controllable && losing(tr.target)) {
          set_class(s, Classification::Losing);
          changed = true;
          break;
        }
      }
    }
    // Dead regions: backward search from marked states and open states.
    std::fill(alive.begin(), alive.end(), 0);
    stack.clear();
    for (NodeId s : discovery_order_) {
      if (losing(s)) continue;
      if (nodes_[s].marked || nodes_[s].expanded_out < nodes_[s].out.size()) {
        alive[s] = 1;
        stack.push_back(s);
      }
    }
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (TransitionId t : nodes_[v].in_expanded) {
        const NodeId u = transitions_[t].source;
        if (!alive[u] && !losing(u)) {
          alive[u] = 1;
          stack.push_back(u);
        }
      }
    }
    for (NodeId s : discovery_order_) {
      if (!alive[s] && !losing(s) && !nodes_[s].marked) {
        set_class(s, Classification::Losing);
        changed = true;
      }
    }
  }
}

void ExplorationState::compute_winning() {
  std::vector<char> in(nodes_.size(), 0);
  for (NodeId s : discovery_order_) {
    const auto& node = nodes_[s];
    if (node.classification == Classification::Losing) continue;
    bool closed = true;
    for (TransitionId t : node.out) {
      if (!transitions_[t].controllable && !expanded_[t]) {
        closed = false;
        break;
      }
    }
    in[s] = closed;
  }

  std::vector<char> reach(nodes_.size());
  std::vector<NodeId> stack;
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeId s : discovery_order_) {
      if (!in[s]) continue;
      for (TransitionId t : nodes_[s].out) {
        const auto& tr = transitions_[t];
        if (!tr.controllable && !in[tr.target]) {
          in[s] = 0;
          changed = true;
          break;
        }
      }
    }
    std::fill(reach.begin(), reach.end(), 0);
    stack.clear();
    for (NodeId s : discovery_order_) {
      if (in[s] && nodes_[s].marked) {
        reach[s] = 1;
        stack.push_back(s);
      }
    }
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (TransitionId t : nodes_[v].in_expanded) {
        const NodeId u = transitions_[t].source;
        if (in[u] && !reach[u]) {
          reach[u] = 1;
          stack.push_back(u);
        }
      }
    }
    for (NodeId s : discovery_order_) {
      if (in[s] && !reach[s]) {
        in[s] = 0;
        changed = true;
      }
    }
  }
  for (NodeId s : discovery_order_) {
    if (in[s]) {
      set_class(s, Classification::Winning);
    } else if (nodes_[s].classification == Classification::Winning) {
      throw std::logic_error("winning state dropped out of the winning fixpoint");
    }
  }
}

}  // namespace dcs
