#include "dcs/benchmarks.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dcs {

std::string to_string(Domain d) {
  switch (d) {
    case Domain::AT: return "AT";
    case Domain::BW: return "BW";
    case Domain::DP: return "DP";
    case Domain::TA: return "TA";
    case Domain::TL: return "TL";
  }
  return "?";
}

std::optional<Domain> parse_domain(std::string_view name) {
  for (Domain d : kAllDomains) {
    if (to_string(d) == name) return d;
  }
  return std::nullopt;
}

namespace {

std::string idx(std::string_view base, int i) { return std::string(base) + "_" + std::to_string(i); }
std::string idx(std::string_view base, int i, int j) {
  return idx(base, i) + "_" + std::to_string(j);
}

class ComponentBuilder {
 public:
  explicit ComponentBuilder(std::string name) : name_(std::move(name)) {}

  LocalState state(const std::string& name, bool marked = false) {
    auto [it, inserted] = ids_.emplace(name, static_cast<LocalState>(states_.size()));
    if (inserted) {
      states_.push_back(name);
      marked_.push_back(false);
    }
    if (marked) marked_[it->second] = true;
    return it->second;
  }

  void edge(const std::string& from, const std::string& label, const std::string& to) {
    edges_.push_back({state(from), label, state(to)});
  }

  Automaton build(const std::set<std::string>& controllable) const {
    Automaton a;
    a.name = name_;
    a.states = states_;
    a.marked = marked_;
    a.initial = 0;
    std::set<std::string> alphabet;
    for (const auto& e : edges_) alphabet.insert(e.label);
    a.alphabet.assign(alphabet.begin(), alphabet.end());
    for (const auto& l : a.alphabet) a.controllable.push_back(controllable.count(l) > 0);
    for (const auto& e : edges_) {
      a.transitions.push_back(
          {e.from, static_cast<std::uint32_t>(a.label_index(e.label)), e.to});
    }
    std::sort(a.transitions.begin(), a.transitions.end());
    a.transitions.erase(std::unique(a.transitions.begin(), a.transitions.end()),
                        a.transitions.end());
    return a;
  }

 private:
  struct Edge {
    LocalState from;
    std::string label;
    LocalState to;
  };
  std::string name_;
  std::vector<std::string> states_;
  std::vector<bool> marked_;
  std::map<std::string, LocalState> ids_;
  std::vector<Edge> edges_;
};

struct Family {
  std::vector<ComponentBuilder> components;
  std::set<std::string> controllable;

  ComponentBuilder& add(std::string name) { return components.emplace_back(std::move(name)); }

  CompositeModel build() const {
    std::vector<Automaton> automata;
    for (const auto& c : components) automata.push_back(c.build(controllable));
    return CompositeModel(std::move(automata));
  }
};

CompositeModel air_traffic(int n, int k) {
  Family f;
  for (int i = 1; i <= n; ++i) {
    auto& p = f.add(idx("Plane", i));
    p.state("ground", true);
    p.edge("ground", idx("request", i), "holding");
    for (int l = 1; l <= k; ++l) {
      const std::string at = idx("level", l);
      p.edge("holding", idx("assign", i, l), at);
      p.edge(at, idx("descend", i, l), l == 1 ? "ground" : idx("level", l - 1));
      f.controllable.insert(idx("assign", i, l));
      f.controllable.insert(idx("descend", i, l));
    }
  }
  for (int l = 1; l <= k; ++l) {
    auto& lv = f.add(idx("Level", l));
    lv.state("free", true);
    lv.state("occupied");
    lv.state("crash");
    for (int i = 1; i <= n; ++i) {
      std::vector<std::string> enter{idx("assign", i, l)};
      if (l < k) enter.push_back(idx("descend", i, l + 1));
      for (const auto& e : enter) {
        lv.edge("free", e, "occupied");
        lv.edge("occupied", e, "crash");
      }
      lv.edge("occupied", idx("descend", i, l), "free");
    }
  }
  return f.build();
}

CompositeModel bidding_workflow(int n, int k) {
  Family f;
  for (int i = 1; i <= n; ++i) {
    auto& d = f.add(idx("Document", i));
    d.state("draft");
    d.edge("draft", idx("route", i), idx("review", 1));
    for (int j = 1; j <= k; ++j) {
      const std::string here = idx("review", j);
      d.edge(here, idx("accept", i, j), j == k ? "accepted" : idx("review", j + 1));
      d.edge(here, idx("reject", i, j), "rejected");
    }
    d.state("accepted", true);
    d.state("returned", true);
    d.edge("rejected", idx("route", i), idx("review", 1));
    d.edge("rejected", idx("return", i), "returned");
    f.controllable.insert(idx("route", i));
    f.controllable.insert(idx("return", i));
  }
  auto& board = f.add("Board");
  board.state("idle", true);
  board.state("busy");
  board.state("jam");
  for (int i = 1; i <= n; ++i) {
    board.edge("idle", idx("route", i), "busy");
    board.edge("busy", idx("route", i), "jam");
    board.edge("busy", idx("accept", i, k), "idle");
    for (int j = 1; j <= k; ++j) board.edge("busy", idx("reject", i, j), "idle");
  }
  return f.build();
}

CompositeModel dining_philosophers(int n, int k) {
  Family f;
  for (int i = 1; i <= n; ++i) {
    auto& p = f.add(idx("Phil", i));
    p.state("hungry");
    p.edge("hungry", idx("left", i), "hasL");
    p.edge("hasL", idx("right", i), idx("polite", 0));
    for (int j = 1; j <= k; ++j) {
      p.edge(idx("polite", j - 1), idx("step", i, j), idx("polite", j));
      f.controllable.insert(idx("step", i, j));
    }
    p.edge(idx("polite", k), idx("eat", i), "ate");
    p.edge("ate", idx("release", i), "done");
    p.state("done", true);
    f.controllable.insert(idx("left", i));
    f.controllable.insert(idx("right", i));
    f.controllable.insert(idx("release", i));
  }
  for (int j = 1; j <= n; ++j) {
    auto& fork = f.add(idx("Fork", j));
    fork.state("free", true);
    if (n == 1) {
      // The only philosopher holds the only fork from both sides.
      fork.edge("free", idx("left", 1), "heldL");
      fork.edge("heldL", idx("right", 1), "heldLR");
      fork.edge("heldLR", idx("release", 1), "free");
      continue;
    }
    const int right_user = (j + n - 2) % n + 1;  // philosopher whose right fork is j
    fork.edge("free", idx("left", j), "heldL");
    fork.edge("heldL", idx("release", j), "free");
    fork.edge("free", idx("right", right_user), "heldR");
    fork.edge("heldR", idx("release", right_user), "free");
  }
  return f.build();
}

CompositeModel travel_agency(int n, int k) {
  Family f;
  f.controllable.insert("commit");
  f.controllable.insert("cancel");
  for (int i = 1; i <= n; ++i) {
    auto& s = f.add(idx("Service", i));
    s.state("start");
    std::string ready = "start";
    for (int j = 1; j <= k; ++j) {
      const std::string asked = idx("asked", j);
      const std::string answered = idx("answered", j);
      s.edge(ready, idx("query", i, j), asked);
      s.edge(asked, idx("avail", i, j), answered);
      s.edge(asked, idx("unavail", i, j), "unavailable");
      s.edge(answered, "cancel", "cancelled");
      f.controllable.insert(idx("query", i, j));
      ready = answered;
    }
    s.edge(ready, idx("reserve", i), "reserved");
    f.controllable.insert(idx("reserve", i));
    s.edge("start", "cancel", "cancelled");
    s.edge("reserved", "cancel", "cancelled");
    s.edge("unavailable", "cancel", "cancelled");
    s.edge("reserved", "commit", "committed");
    s.edge("unavailable", "commit", "committed");
    s.state("committed", true);
    s.state("cancelled", true);
  }
  // Cancelling needs a failed answer; committing after one breaks the trip.
  auto& trip = f.add("Trip");
  trip.state("planning");
  trip.state("failed");
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= k; ++j) {
      trip.edge("planning", idx("unavail", i, j), "failed");
      trip.edge("failed", idx("unavail", i, j), "failed");
    }
  }
  trip.edge("planning", "commit", "booked");
  trip.edge("failed", "commit", "broken");
  trip.edge("failed", "cancel", "cancelled");
  trip.state("booked", true);
  trip.state("cancelled", true);
  return f.build();
}

CompositeModel transfer_line(int n, int k) {
  Family f;
  for (int i = 1; i <= n; ++i) {
    auto& m = f.add(idx("Machine", i));
    m.state("idle", true);
    m.edge("idle", idx("take", i), "busy");
    m.edge("busy", idx("put", i), "idle");
    f.controllable.insert(idx("take", i));
  }
  for (int i = 1; i <= n; ++i) {
    auto& b = f.add(idx("Buffer", i));
    b.state(idx("b", 0), true);
    const std::string consume = i < n ? idx("take", i + 1) : std::string("out");
    for (int j = 0; j < k; ++j) {
      b.edge(idx("b", j), idx("put", i), idx("b", j + 1));
      b.edge(idx("b", j + 1), consume, idx("b", j));
    }
    b.edge(idx("b", k), idx("put", i), "overflow");
  }
  f.controllable.insert("out");
  auto& goal = f.add("Goal");
  goal.state("pending");
  goal.state("shipped", true);
  goal.edge("pending", "out", "shipped");
  goal.edge("shipped", "out", "shipped");
  return f.build();
}

}  // namespace

CompositeModel generate_benchmark(const BenchmarkSpec& spec) {
  if (spec.n < 1 || spec.k < 1) {
    throw ContractViolation("benchmark parameters must satisfy n >= 1 and k >= 1");
  }
  switch (spec.domain) {
    case Domain::AT: return air_traffic(spec.n, spec.k);
    case Domain::BW: return bidding_workflow(spec.n, spec.k);
    case Domain::DP: return dining_philosophers(spec.n, spec.k);
    case Domain::TA: return travel_agency(spec.n, spec.k);
    case Domain::TL: return transfer_line(spec.n, spec.k);
  }
  throw ContractViolation("unknown domain");
}

}  // namespace dcs
