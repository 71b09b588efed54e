#include <random>

#include "doctest.h"

#include "dcs/benchmarks.hpp"
#include "dcs/lts.hpp"
#include "dcs/model_io.hpp"
#include "support/oracles.hpp"

using namespace dcs;

namespace {

Automaton make_automaton(std::string name, std::vector<std::string> states,
                         std::vector<std::string> alphabet, std::vector<bool> controllable,
                         std::vector<Automaton::Transition> trans, std::vector<bool> marked) {
  Automaton a;
  a.name = std::move(name);
  a.states = std::move(states);
  a.alphabet = std::move(alphabet);
  a.controllable = std::move(controllable);
  a.transitions = std::move(trans);
  a.marked = std::move(marked);
  return a;
}

// Two components sharing `sync`; each also has a private label.
CompositeModel two_component_model() {
  auto a = make_automaton("A", {"a0", "a1"}, {"priv_a", "sync"}, {true, false},
                          {{0, 0, 1}, {1, 1, 0}}, {true, false});
  auto b = make_automaton("B", {"b0", "b1", "b2"}, {"priv_b", "sync"}, {false, false},
                          {{0, 1, 1}, {1, 0, 2}, {2, 1, 0}, {0, 0, 2}}, {true, true, false});
  return CompositeModel({a, b});
}

}  // namespace

TEST_SUITE("lts") {

TEST_CASE("shared label fires only when every participant enables it") {
  const auto m = two_component_model();
  const PlantState s{{0, 0}};
  const auto succ = compose_successors(m, s);
  // At (a0, b0): priv_a enabled, priv_b enabled, sync blocked by A.
  REQUIRE(succ.size() == 2);
  CHECK(m.label_name(succ[0].label) == "priv_a");
  CHECK(succ[0].target == PlantState{{1, 0}});
  CHECK(succ[0].controllable);
  CHECK(m.label_name(succ[1].label) == "priv_b");
  CHECK(succ[1].target == PlantState{{0, 2}});
  CHECK_FALSE(succ[1].controllable);

  const auto sync = compose_successors(m, PlantState{{1, 0}});
  bool found = false;
  for (const auto& t : sync) {
    if (m.label_name(t.label) == "sync") {
      found = true;
      CHECK(t.target == PlantState{{0, 1}});
    }
  }
  CHECK(found);
}

TEST_CASE("disjoint alphabets interleave") {
  const auto a = make_automaton("A", {"p"}, {"a"}, {true}, {{0, 0, 0}}, {true});
  const auto b = make_automaton("B", {"p"}, {"b"}, {false}, {{0, 0, 0}}, {true});
  const CompositeModel m({a, b});
  const auto succ = compose_successors(m, m.initial_state());
  REQUIRE(succ.size() == 2);
  CHECK(m.label_name(succ[0].label) == "a");
  CHECK(m.label_name(succ[1].label) == "b");
  CHECK(succ[0].target == m.initial_state());
  CHECK(succ[1].target == m.initial_state());
}

TEST_CASE("marking requires every component") {
  const auto m = two_component_model();
  CHECK(is_marked(m, PlantState{{0, 0}}));
  CHECK(is_marked(m, PlantState{{0, 1}}));
  CHECK_FALSE(is_marked(m, PlantState{{1, 0}}));
  CHECK_FALSE(is_marked(m, PlantState{{0, 2}}));
}

TEST_CASE("successors match brute force on every reachable state") {
  for (Domain d : kAllDomains) {
    for (int n = 1; n <= 2; ++n) {
      for (int k = 1; k <= 2; ++k) {
        const auto m = generate_benchmark({d, n, k});
        const auto p = explicit_product(m, 200000);
        for (const auto& s : p.plant_states) {
          auto expected = testing::brute_force_successors(m, s);
          const auto actual = compose_successors(m, s);
          std::sort(expected.begin(), expected.end(), [](const auto& x, const auto& y) {
            return std::tie(x.label, x.target) < std::tie(y.label, y.target);
          });
          REQUIRE(actual == expected);
        }
      }
    }
  }
}

TEST_CASE("marking agrees with the explicit product on random samples") {
  const auto m = generate_benchmark({Domain::TL, 2, 2});
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    PlantState s;
    for (const auto& c : m.components()) {
      std::uniform_int_distribution<LocalState> pick(0, static_cast<LocalState>(c.num_states() - 1));
      s.locals.push_back(pick(rng));
    }
    CHECK(is_marked(m, s) == testing::brute_force_marked(m, s));
  }
}

TEST_CASE("single component product is isomorphic to the component") {
  const auto a = make_automaton("A", {"x", "y", "z"}, {"back", "go"}, {true, false},
                                {{0, 1, 1}, {1, 0, 2}, {2, 0, 0}}, {true, false, false});
  const auto p = explicit_product(CompositeModel({a}), 10);
  CHECK(p.plant_states.size() == 3);
  CHECK(p.automaton.transitions.size() == 3);
}

TEST_CASE("disjoint two-state components give four product states") {
  const auto a = make_automaton("A", {"p", "q"}, {"x"}, {true}, {{0, 0, 1}}, {false, true});
  const auto b = make_automaton("B", {"p", "q"}, {"y"}, {true}, {{0, 0, 1}}, {false, true});
  const auto p = explicit_product(CompositeModel({a, b}), 10);
  CHECK(p.plant_states.size() == 4);
  CHECK(p.automaton.transitions.size() == 4);
}

TEST_CASE("transfer line regression counts") {
  const auto p = explicit_product(generate_benchmark({Domain::TL, 2, 1}), 100000);
  CHECK(p.plant_states.size() == 72);
  CHECK(p.automaton.transitions.size() == 120);
}

TEST_CASE("explicit product enforces its state budget") {
  const auto m = generate_benchmark({Domain::TL, 2, 1});
  CHECK_THROWS_AS(explicit_product(m, 5), StateBudgetExceeded);
}

TEST_CASE("composition is pure") {
  const auto m = generate_benchmark({Domain::DP, 2, 2});
  const auto s = m.initial_state();
  CHECK(compose_successors(m, s) == compose_successors(m, s));
}

TEST_CASE("invalid states are contract violations") {
  const auto m = two_component_model();
  CHECK_THROWS_AS(compose_successors(m, PlantState{{0}}), ContractViolation);
  CHECK_THROWS_AS(compose_successors(m, PlantState{{0, 7}}), ContractViolation);
}

TEST_CASE("inconsistent controllability is rejected") {
  const auto a = make_automaton("A", {"p"}, {"x"}, {true}, {{0, 0, 0}}, {true});
  const auto b = make_automaton("B", {"p"}, {"x"}, {false}, {{0, 0, 0}}, {true});
  CHECK_THROWS_AS(CompositeModel({a, b}), ModelError);
}

TEST_CASE("dangling transition ids are rejected") {
  const auto a = make_automaton("A", {"p"}, {"x"}, {true}, {{0, 0, 3}}, {true});
  CHECK_THROWS_AS(CompositeModel({a}), ModelError);
}

TEST_CASE("interner assigns dense ids in order of first sight") {
  StateInterner in(2);
  CHECK(in.intern(PlantState{{1, 0}}) == std::pair<std::uint32_t, bool>{0, true});
  CHECK(in.intern(PlantState{{0, 0}}) == std::pair<std::uint32_t, bool>{1, true});
  CHECK(in.intern(PlantState{{1, 0}}) == std::pair<std::uint32_t, bool>{0, false});
  CHECK(in.find(PlantState{{0, 1}}) == -1);
  CHECK(in.size() == 2);
}

}  // TEST_SUITE
