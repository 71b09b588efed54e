#include <fstream>
#include <sstream>

#include "doctest.h"

#include "dcs/benchmarks.hpp"
#include "dcs/model_io.hpp"

using namespace dcs;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_parse_error(const std::string& text, std::size_t line, std::size_t column) {
  try {
    parse_model(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == line);
    CHECK(e.column() == column);
  }
}

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("one-state component with no transitions") {
  const auto m = parse_model("component P { states: s; init: s; marked: s; }\ncompose: P;\n");
  REQUIRE(m.num_components() == 1);
  CHECK(m.components()[0].num_states() == 1);
  CHECK(m.components()[0].transitions.empty());
  CHECK(m.num_labels() == 0);
  CHECK(m.components()[0].marked[0]);
}

TEST_CASE("golden grammar sample") {
  const auto m = parse_model(read_file(DCS_TEST_DATA_DIR "/grammar_sample.model"));
  REQUIRE(m.num_components() == 2);
  const auto& w = m.components()[0];
  const auto& c = m.components()[1];
  CHECK(w.name == "Worker");
  CHECK(c.name == "Clock");
  CHECK(w.states == std::vector<std::string>{"idle", "busy", "done"});
  CHECK(w.marked == std::vector<bool>{true, false, true});
  CHECK(w.alphabet == std::vector<std::string>{"finish.lap_2", "start", "work_1"});
  CHECK(w.transitions.size() == 4);
  CHECK(c.alphabet == std::vector<std::string>{"pause", "work_1"});
  CHECK(m.labels() == std::vector<std::string>{"finish.lap_2", "pause", "start", "work_1"});
  CHECK(m.is_controllable(m.label_id("start")));
  CHECK(m.is_controllable(m.label_id("finish.lap_2")));
  CHECK_FALSE(m.is_controllable(m.label_id("work_1")));
  CHECK_FALSE(m.is_controllable(m.label_id("pause")));
  // busy -work_1-> {busy, idle}
  const auto succ = compose_successors(m, PlantState{{1, 0}});
  std::size_t work = 0;
  for (const auto& t : succ) work += m.label_name(t.label) == "work_1";
  CHECK(work == 2);
}

TEST_CASE("serialization round-trips") {
  const auto m = parse_model(read_file(DCS_TEST_DATA_DIR "/grammar_sample.model"));
  const auto text = serialize_model(m);
  const auto again = parse_model(text);
  CHECK(again == m);
  CHECK(serialize_model(again) == text);
}

TEST_CASE("generated corpus round-trips") {
  for (Domain d : kAllDomains) {
    for (int n = 1; n <= 3; ++n) {
      for (int k = 1; k <= 3; ++k) {
        const auto m = generate_benchmark({d, n, k});
        const auto text = serialize_model(m);
        const auto parsed = parse_model(text);
        CHECK(parsed == m);
        CHECK(serialize_model(parsed) == text);
      }
    }
  }
}

TEST_CASE("errors carry positions") {
  check_parse_error("component P { states: s; init: s; }\ncompose: Q;\n", 2, 10);
  check_parse_error("component P {\n  states: s;\n  init: t;\n}\ncompose: P;\n", 3, 9);
  check_parse_error("component P { states: s; init: s; trans: s -a-> x; }\ncompose: P;", 1, 49);
  check_parse_error("component P { states: s; init: s; }\n", 2, 1);
  check_parse_error("component P { states: s; init: s; } $", 1, 37);
  check_parse_error("component P { states: s s; init: s; }\ncompose: P;", 1, 25);
}

TEST_CASE("inconsistent controllability is a parse error") {
  const std::string text =
      "controllable: a;\n"
      "component P { states: s; init: s; controllable: a; trans: s -a-> s; }\n"
      "component Q { states: s; init: s; trans: s -a-> s; }\n"
      "compose: P || Q;\n";
  const auto m = parse_model(text);
  CHECK(m.is_controllable(m.label_id("a")));
  const std::string bad =
      "component P { states: s; init: s; controllable: a; trans: s -a-> s; }\n"
      "component Q { states: s; init: s; trans: s -a-> s; }\n"
      "compose: P || Q;\n";
  CHECK_THROWS_AS(parse_model(bad), ParseError);
}

TEST_CASE("serialization is deterministic") {
  const auto m = generate_benchmark({Domain::BW, 2, 3});
  CHECK(serialize_model(m) == serialize_model(generate_benchmark({Domain::BW, 2, 3})));
}

}  // TEST_SUITE
