#include <map>
#include <set>
#include <tuple>

#include "doctest.h"

#include "dcs/benchmarks.hpp"
#include "dcs/model_io.hpp"
#include "dcs/policies.hpp"
#include "dcs/synthesis.hpp"

using namespace dcs;

namespace {

CompositeModel with_initial(const CompositeModel& m, const PlantState& s) {
  auto comps = m.components();
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i].initial = s.locals[i];
  return CompositeModel(comps);
}

/// Winning status of every reachable plant state, decided by the monolithic
/// oracle rooted at that state.
class OracleClassifier {
 public:
  explicit OracleClassifier(const CompositeModel& m) : model_(&m) {}
  bool winning(const PlantState& s) {
    auto it = cache_.find(s);
    if (it == cache_.end()) {
      it = cache_.emplace(s, monolithic_oracle(with_initial(*model_, s), 1000000).realizable).first;
    }
    return it->second;
  }

 private:
  const CompositeModel* model_;
  std::map<PlantState, bool> cache_;
};

void check_frontier_law(const ExplorationState& es) {
  std::vector<TransitionId> expected;
  for (NodeId n : es.discovery_order()) {
    for (TransitionId t : es.successors(n)) {
      if (!es.is_expanded(t)) expected.push_back(t);
    }
  }
  std::sort(expected.begin(), expected.end());
  REQUIRE(es.frontier() == expected);
  REQUIRE(es.expansions() == es.history().size());
}

using TripleSet = std::set<std::tuple<PlantState, LabelId, PlantState>>;

TripleSet product_transitions(const CompositeModel& m) {
  const auto p = explicit_product(m, 1000000);
  TripleSet out;
  for (const auto& t : p.automaton.transitions) {
    out.emplace(p.plant_states[t.source], t.label, p.plant_states[t.target]);
  }
  return out;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("initial discovery fills the frontier") {
  const auto m = generate_benchmark({Domain::AT, 1, 1});
  ExplorationState es(m);
  CHECK_FALSE(es.frontier().empty());
  CHECK(es.history().empty());
  CHECK(es.is_discovered(es.initial()));
  CHECK_THROWS_AS(es.discover(es.initial()), ContractViolation);
}

TEST_CASE("unmarked deadlock initial state is losing") {
  const auto m = parse_model("component P { states: s; init: s; }\ncompose: P;\n");
  ExplorationState es(m);
  CHECK(es.classification(es.initial()) == Classification::Losing);
  CHECK_FALSE(monolithic_oracle(m, 10).realizable);
  RandomPolicy random;
  const auto v = run_dcs(m, random, 10, 1);
  CHECK(v.decided);
  CHECK_FALSE(v.realizable);
  CHECK(v.expansions == 0);
}

TEST_CASE("marked deadlock is winning") {
  const auto m = parse_model("component P { states: s; init: s; marked: s; }\ncompose: P;\n");
  ExplorationState es(m);
  CHECK(es.classification(es.initial()) == Classification::Winning);
  CHECK(monolithic_oracle(m, 10).realizable);
}

TEST_CASE("chain to a marked sink") {
  const auto m = parse_model(
      "controllable: go;\n"
      "component P { states: a b; init: a; marked: b; trans: a -go-> b; }\ncompose: P;\n");
  ExplorationState es(m);
  CHECK(es.classification(es.initial()) == Classification::Undecided);
  REQUIRE(es.frontier().size() == 1);
  es.expand(es.frontier()[0]);
  CHECK(es.classification(es.initial()) == Classification::Winning);
  const auto d = extract_director(es);
  CHECK(d.choice.at(PlantState{{0}}) == m.label_id("go"));
  CHECK(d.choice.at(PlantState{{1}}) == std::nullopt);
  CHECK_FALSE(validate_director(m, d).has_value());
}

TEST_CASE("safe inaction maps to no event") {
  const auto m = parse_model(
      "controllable: go;\n"
      "component P { states: a b; init: a; marked: a; trans: a -go-> b; }\ncompose: P;\n");
  const auto v = monolithic_oracle(m, 10);
  REQUIRE(v.realizable);
  CHECK(v.director->choice.at(PlantState{{0}}) == std::nullopt);
  BfsPolicy bfs;
  const auto r = run_dcs(m, bfs, 100, 0);
  REQUIRE(r.realizable);
  CHECK(r.director->choice.at(PlantState{{0}}) == std::nullopt);
  CHECK_FALSE(validate_director(m, *r.director).has_value());
}

TEST_CASE("uncontrollable step into a deadlock propagates losing") {
  const auto m = parse_model(
      "controllable: go;\n"
      "component P { states: a d m; init: a; marked: m;\n"
      "  trans: a -fail-> d; a -go-> m; }\ncompose: P;\n");
  ExplorationState es(m);
  const auto fail = std::find_if(es.frontier().begin(), es.frontier().end(), [&](TransitionId t) {
    return m.label_name(es.transition(t).label) == "fail";
  });
  REQUIRE(fail != es.frontier().end());
  es.expand(*fail);
  CHECK(es.classification(es.transition(es.history()[0]).target) == Classification::Losing);
  CHECK(es.classification(es.initial()) == Classification::Losing);
}

TEST_CASE("uncontrollable loop without marked states is losing") {
  const auto m = parse_model(
      "component P { states: a b; init: a; trans: a -u-> b; b -v-> a; }\ncompose: P;\n");
  ExplorationState es(m);
  while (!es.frontier().empty()) es.expand(es.frontier().front());
  CHECK(es.classification(0) == Classification::Losing);
  CHECK(es.classification(1) == Classification::Losing);
}

TEST_CASE("expanding outside the frontier is a contract violation") {
  const auto m = generate_benchmark({Domain::TL, 1, 1});
  ExplorationState es(m);
  const TransitionId t = es.frontier().front();
  es.expand(t);
  CHECK_THROWS_AS(es.expand(t), ContractViolation);
  CHECK_THROWS_AS(es.expand(100000), ContractViolation);
}

TEST_CASE("full exploration covers the explicit product") {
  for (Domain d : kAllDomains) {
    CAPTURE(to_string(d));
    const auto m = generate_benchmark({d, 1, 2});
    ExplorationState es(m);
    while (!es.frontier().empty()) {
      es.expand(es.frontier().front());
      check_frontier_law(es);
    }
    TripleSet seen;
    for (TransitionId t = 0; t < es.num_transitions(); ++t) {
      const auto& tr = es.transition(t);
      seen.emplace(es.plant_state(tr.source), tr.label, es.plant_state(tr.target));
    }
    CHECK(seen == product_transitions(m));
  }
}

TEST_CASE("frontier law, finality and soundness along random runs") {
  for (Domain d : kAllDomains) {
    for (int n = 1; n <= 2; ++n) {
      for (int k = 1; k <= 2; ++k) {
        CAPTURE(to_string(d));
        CAPTURE(n);
        CAPTURE(k);
        const auto m = generate_benchmark({d, n, k});
        OracleClassifier oracle(m);
        for (std::uint64_t seed = 0; seed < 2; ++seed) {
          ExplorationState es(m);
          RandomPolicy random;
          Rng rng(seed);
          std::vector<Classification> previous(es.num_nodes(), Classification::Undecided);
          while (!es.frontier().empty()) {
            es.expand(random.select(es, rng));
            check_frontier_law(es);
            previous.resize(es.num_nodes(), Classification::Undecided);
            for (NodeId v = 0; v < es.num_nodes(); ++v) {
              const auto c = es.classification(v);
              if (previous[v] != Classification::Undecided) REQUIRE(c == previous[v]);
              previous[v] = c;
              if (c == Classification::Winning) REQUIRE(oracle.winning(es.plant_state(v)));
              if (c == Classification::Losing) REQUIRE_FALSE(oracle.winning(es.plant_state(v)));
            }
            for (NodeId v : es.discovery_order()) {
              if (v == es.initial()) continue;
              const auto parent = es.discovery_parent(v);
              REQUIRE(parent.has_value());
              const NodeId p = es.transition(*parent).source;
              REQUIRE(es.discovery_index(p) < es.discovery_index(v));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("budget exhaustion is undecided") {
  const auto m = generate_benchmark({Domain::TL, 2, 2});
  BfsPolicy bfs;
  const auto v = run_dcs(m, bfs, 1, 0);
  CHECK_FALSE(v.decided);
  CHECK(v.expansions == 1);
  CHECK_FALSE(v.realizable);
  CHECK_THROWS_AS(run_dcs(m, bfs, 0, 0), ContractViolation);
}

TEST_CASE("random policy on DP(1,1) agrees with the oracle") {
  const auto m = generate_benchmark({Domain::DP, 1, 1});
  const bool expected = monolithic_oracle(m, 1000).realizable;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomPolicy random;
    const auto v = run_dcs(m, random, 100000, seed);
    CHECK(v.decided);
    CHECK(v.realizable == expected);
  }
}

TEST_CASE("verdicts and directors do not depend on the policy") {
  for (Domain d : kAllDomains) {
    const auto m = generate_benchmark({d, 2, 2});
    const bool expected = monolithic_oracle(m, 1000000).realizable;
    RandomPolicy random;
    BfsPolicy bfs;
    DfsPolicy dfs;
    RaPolicy ra;
    for (ExplorationPolicy* p : std::initializer_list<ExplorationPolicy*>{&random, &bfs, &dfs, &ra}) {
      const auto v = run_dcs(m, *p, 1000000, 3);
      CHECK(v.decided);
      CHECK(v.realizable == expected);
      if (v.realizable) CHECK_FALSE(validate_director(m, *v.director).has_value());
    }
  }
}

TEST_CASE("validator rejects a director that walks into a deadlock") {
  const auto m = parse_model(
      "controllable: bad good;\n"
      "component P { states: a d m; init: a; marked: m;\n"
      "  trans: a -bad-> d; a -good-> m; }\ncompose: P;\n");
  Director d;
  d.choice[PlantState{{0}}] = m.label_id("bad");
  d.choice[PlantState{{1}}] = std::nullopt;
  CHECK(validate_director(m, d).has_value());
  d.choice[PlantState{{0}}] = m.label_id("good");
  d.choice.erase(PlantState{{1}});
  d.choice[PlantState{{2}}] = std::nullopt;
  CHECK_FALSE(validate_director(m, d).has_value());
}

TEST_CASE("oracle refuses products over its budget") {
  CHECK_THROWS_AS(monolithic_oracle(generate_benchmark({Domain::TL, 2, 2}), 10),
                  StateBudgetExceeded);
}

TEST_CASE("verdict JSON") {
  Verdict v;
  v.realizable = true;
  v.decided = true;
  v.expansions = 12;
  const auto j = verdict_to_json(v, 7, "ra", "TL(1,1)");
  CHECK(j.at("realizable") == true);
  CHECK(j.at("decided") == true);
  CHECK(j.at("expansions") == 12);
  CHECK(j.at("seed") == 7);
  CHECK(j.at("policy") == "ra");
  CHECK(j.at("instance") == "TL(1,1)");
}

}  // TEST_SUITE
