#include "dcs/synthesis.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

#include "dcs/version.hpp"

namespace dcs {

Verdict run_dcs(ExplorationState& es, ExplorationPolicy& policy, std::size_t budget, Rng& rng) {
  if (budget < 1) throw ContractViolation("run_dcs: budget must be at least 1");
  policy.prepare(es.model());
  while (!es.decided() && !es.frontier().empty() && es.expansions() < budget) {
    const TransitionId t = policy.select(es, rng);
    es.expand(t);
  }
  Verdict v;
  v.decided = es.decided();
  v.expansions = es.expansions();
  v.realizable = es.classification(es.initial()) == Classification::Winning;
  if (v.realizable) v.director = extract_director(es);
  return v;
}

Verdict run_dcs(const CompositeModel& model, ExplorationPolicy& policy, std::size_t budget,
                std::uint64_t seed) {
  ExplorationState es(model);
  Rng rng(seed);
  return run_dcs(es, policy, budget, rng);
}

Director extract_director(const ExplorationState& es) {
  if (es.classification(es.initial()) != Classification::Winning) {
    throw std::logic_error("extract_director: initial state is not winning");
  }
  const std::size_t n = es.num_nodes();
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  auto winning = [&](NodeId s) { return es.classification(s) == Classification::Winning; };

  std::vector<std::size_t> dist(n, kInf);
  std::deque<NodeId> queue;
  for (NodeId s : es.discovery_order()) {
    if (winning(s) && es.is_marked(s)) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  // Backward BFS over expanded transitions inside the winning set.
  std::vector<std::vector<TransitionId>> incoming(n);
  for (TransitionId t : es.history()) incoming[es.transition(t).target].push_back(t);
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (TransitionId t : incoming[v]) {
      const NodeId u = es.transition(t).source;
      if (winning(u) && dist[u] == kInf) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }

  Director d;
  for (NodeId s : es.discovery_order()) {
    if (!winning(s)) continue;
    std::optional<LabelId> choice;
    if (!es.is_marked(s)) {
      if (dist[s] == kInf) throw std::logic_error("winning state without a path to marked");
      std::optional<TransitionId> best;
      for (TransitionId t : es.successors(s)) {
        const auto& tr = es.transition(t);
        if (!es.is_expanded(t) || !winning(tr.target) || dist[tr.target] + 1 != dist[s]) continue;
        if (!best || tr.label < es.transition(*best).label) best = t;
      }
      if (!best) throw std::logic_error("winning state without a shortest-path successor");
      if (es.transition(*best).controllable) choice = es.transition(*best).label;
    }
    d.choice.emplace(es.plant_state(s), choice);
  }
  if (auto err = validate_director(es.model(), d)) {
    throw std::logic_error("extracted director failed validation: " + *err);
  }
  return d;
}

std::optional<std::string> validate_director(const CompositeModel& model, const Director& d) {
  StateInterner ids(model.num_components());
  std::vector<std::vector<std::uint32_t>> preds;
  std::vector<bool> marked;
  std::deque<std::uint32_t> queue;
  ids.intern(model.initial_state());
  preds.emplace_back();
  marked.push_back(is_marked(model, model.initial_state()));
  queue.push_back(0);
  while (!queue.empty()) {
    const std::uint32_t id = queue.front();
    queue.pop_front();
    const PlantState s = ids.state(id);
    auto it = d.choice.find(s);
    if (it == d.choice.end()) return "closed loop reaches a state without a director choice";
    const auto successors = compose_successors(model, s);
    if (it->second && std::none_of(successors.begin(), successors.end(), [&](const auto& t) {
          return t.label == *it->second;
        })) {
      return "director chooses an event that is not enabled";
    }
    std::size_t enabled = 0;
    for (const auto& t : successors) {
      if (t.controllable && (!it->second || *it->second != t.label)) continue;
      ++enabled;
      auto [target, inserted] = ids.intern(t.target);
      if (inserted) {
        preds.emplace_back();
        marked.push_back(is_marked(model, t.target));
        queue.push_back(target);
      }
      preds[target].push_back(id);
    }
    if (enabled == 0 && !marked[id]) return "closed loop reaches an unmarked deadlock";
  }
  std::vector<bool> coreach(ids.size(), false);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t i = 0; i < ids.size(); ++i) {
    if (marked[i]) {
      coreach[i] = true;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto u : preds[v]) {
      if (!coreach[u]) {
        coreach[u] = true;
        stack.push_back(u);
      }
    }
  }
  if (std::find(coreach.begin(), coreach.end(), false) != coreach.end()) {
    return "closed loop reaches a state from which no marked state is reachable";
  }
  return std::nullopt;
}

Verdict monolithic_oracle(const CompositeModel& model, std::size_t max_states) {
  const ExplicitProduct product = explicit_product(model, max_states);
  const Automaton& a = product.automaton;
  const std::size_t n = a.num_states();
  std::vector<std::vector<std::size_t>> out(n), in(n);
  for (std::size_t i = 0; i < a.transitions.size(); ++i) {
    out[a.transitions[i].source].push_back(i);
    in[a.transitions[i].target].push_back(i);
  }
  auto ctrl = [&](std::size_t t) { return a.controllable[a.transitions[t].label]; };

  std::vector<bool> alive(n, true);
  std::vector<bool> reach(n);
  for (bool changed = true; changed;) {
    changed = false;
    // (a) uncontrollable escapes and exhausted choices
    for (std::size_t s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      bool any_alive_succ = false;
      bool unsafe = false;
      for (auto t : out[s]) {
        const bool target_alive = alive[a.transitions[t].target];
        any_alive_succ |= target_alive;
        unsafe |= !ctrl(t) && !target_alive;
      }
      if (unsafe || (!a.marked[s] && !any_alive_succ)) {
        alive[s] = false;
        changed = true;
      }
    }
    // (b) states that cannot reach a marked state among survivors
    std::fill(reach.begin(), reach.end(), false);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
      if (alive[s] && a.marked[s]) {
        reach[s] = true;
        stack.push_back(s);
      }
    }
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto t : in[v]) {
        const auto u = a.transitions[t].source;
        if (alive[u] && !reach[u]) {
          reach[u] = true;
          stack.push_back(u);
        }
      }
    }
    for (std::size_t s = 0; s < n; ++s) {
      if (alive[s] && !reach[s]) {
        alive[s] = false;
        changed = true;
      }
    }
  }

  Verdict v;
  v.decided = true;
  v.expansions = a.transitions.size();
  v.realizable = alive[a.initial];
  if (!v.realizable) return v;

  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n, kInf);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (alive[s] && a.marked[s]) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const auto x = queue.front();
    queue.pop_front();
    for (auto t : in[x]) {
      const auto u = a.transitions[t].source;
      if (alive[u] && dist[u] == kInf) {
        dist[u] = dist[x] + 1;
        queue.push_back(u);
      }
    }
  }
  Director d;
  for (std::size_t s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    std::optional<LabelId> choice;
    if (!a.marked[s]) {
      std::optional<std::size_t> best;
      for (auto t : out[s]) {
        const auto& tr = a.transitions[t];
        if (!alive[tr.target] || dist[tr.target] + 1 != dist[s]) continue;
        if (!best || tr.label < a.transitions[*best].label) best = t;
      }
      if (best && ctrl(*best)) choice = a.transitions[*best].label;
    }
    d.choice.emplace(product.plant_states[s], choice);
  }
  v.director = std::move(d);
  return v;
}

nlohmann::json verdict_to_json(const Verdict& v, std::uint64_t seed, const std::string& policy,
                               const std::string& instance) {
  return nlohmann::json{{"realizable", v.realizable}, {"decided", v.decided},
                        {"expansions", v.expansions}, {"seed", seed},
                        {"policy", policy},           {"instance", instance},
                        {"tool_version", kToolVersion}};
}

}  // namespace dcs
