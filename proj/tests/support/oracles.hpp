#pragma once

// Independent reference computations used only by tests.

#include <algorithm>
#include <vector>

#include "dcs/lts.hpp"

namespace dcs::testing {

/// Successors by scanning every component's raw transition list for every
/// global label; no use of the model's precomputed adjacency.
inline std::vector<PlantTransition> brute_force_successors(const CompositeModel& model,
                                                           const PlantState& s) {
  std::vector<PlantTransition> out;
  for (LabelId l = 0; l < model.num_labels(); ++l) {
    const std::string& name = model.label_name(l);
    std::vector<PlantState> partial{s};
    bool participates_any = false;
    for (std::size_t ci = 0; ci < model.num_components(); ++ci) {
      const auto& c = model.components()[ci];
      const auto li = c.label_index(name);
      if (li < 0) continue;
      participates_any = true;
      std::vector<PlantState> next;
      for (const auto& p : partial) {
        for (const auto& t : c.transitions) {
          if (t.source == s.locals[ci] && t.label == static_cast<std::uint32_t>(li)) {
            PlantState q = p;
            q.locals[ci] = t.target;
            next.push_back(q);
          }
        }
      }
      partial = std::move(next);
    }
    if (!participates_any) continue;
    std::sort(partial.begin(), partial.end());
    partial.erase(std::unique(partial.begin(), partial.end()), partial.end());
    for (auto& q : partial) out.push_back({s, l, q, model.is_controllable(l)});
  }
  return out;
}

inline bool brute_force_marked(const CompositeModel& model, const PlantState& s) {
  bool all = true;
  for (std::size_t ci = 0; ci < model.num_components(); ++ci) {
    all = all && model.components()[ci].marked[s.locals[ci]];
  }
  return all;
}

}  // namespace dcs::testing
