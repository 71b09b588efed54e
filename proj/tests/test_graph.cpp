#include <random>
#include <set>

#include "doctest.h"

#include "dcs/benchmarks.hpp"
#include "dcs/graph_encoding.hpp"
#include "dcs/model_io.hpp"
#include "dcs/policies.hpp"
#include "support/graphs.hpp"

using namespace dcs;

TEST_SUITE("graph") {

TEST_CASE("initial state with three distinct successors") {
  const auto m = parse_model(
      "controllable: a b c;\n"
      "component P { states: s x y z; init: s; marked: s; trans: s -a-> x; s -b-> y; s -c-> z; }\n"
      "compose: P;\n");
  ExplorationState es(m);
  const auto g = build_graph(es, NormalizedAlphabet(m));
  CHECK(g.num_edges() == 3);
  CHECK(g.frontier == std::vector<std::size_t>{0, 1, 2});
  CHECK(g.num_nodes() == 4);
  CHECK(g.edge_features.rows() == 3);
  CHECK(g.node_features.rows() == 4);
}

TEST_CASE("placeholders are shared by plant state") {
  const auto m = parse_model(
      "controllable: a b;\n"
      "component P { states: s x; init: s; marked: s; trans: s -a-> x; s -b-> x; }\n"
      "compose: P;\n");
  ExplorationState es(m);
  const auto g = build_graph(es, NormalizedAlphabet(m));
  CHECK(g.num_nodes() == 2);
  CHECK(g.edges[0] == GraphEdge{0, 1});
  CHECK(g.edges[1] == GraphEdge{0, 1});
  CHECK(g.node_features.row(1).head(4).isZero());
}

TEST_CASE("empty frontier leaves only history edges") {
  const auto m = generate_benchmark({Domain::AT, 1, 1});
  const NormalizedAlphabet alphabet(m);
  ExplorationState es(m);
  while (!es.frontier().empty()) es.expand(es.frontier().front());
  const auto g = build_graph(es, alphabet);
  CHECK(g.frontier.empty());
  CHECK(g.num_edges() == es.history().size());
  CHECK(g.num_nodes() == es.discovery_order().size());
}

TEST_CASE("logged AT(1,1) run keeps the encoding structure") {
  const auto m = generate_benchmark({Domain::AT, 1, 1});
  const NormalizedAlphabet alphabet(m);
  ExplorationState es(m);
  IncrementalGraphBuilder builder(alphabet);
  while (true) {
    const auto& inc = builder.update(es);
    const auto scratch = build_graph(es, alphabet);
    CHECK(inc == scratch);
    CHECK(scratch.frontier.size() == es.frontier().size());
    for (std::size_t i = 0; i < scratch.frontier.size(); ++i) {
      CHECK(scratch.frontier[i] == es.history().size() + i);
      CHECK(scratch.edge_transitions[scratch.frontier[i]] == es.frontier()[i]);
    }
    if (es.frontier().empty()) break;
    es.expand(es.frontier().front());
  }
}

TEST_CASE("incremental and scratch encodings agree on random runs") {
  for (Domain d : kAllDomains) {
    const auto m = generate_benchmark({d, 2, 2});
    const NormalizedAlphabet alphabet(m);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ExplorationState es(m);
      IncrementalGraphBuilder builder(alphabet);
      RandomPolicy random;
      Rng rng(seed);
      for (int step = 0; step < 80 && !es.frontier().empty(); ++step) {
        REQUIRE(builder.update(es) == build_graph(es, alphabet));
        es.expand(random.select(es, rng));
      }
      REQUIRE(builder.update(es) == build_graph(es, alphabet));
    }
  }
}

TEST_CASE("incremental builder rejects a different run") {
  const auto m = generate_benchmark({Domain::TL, 1, 1});
  const NormalizedAlphabet alphabet(m);
  ExplorationState a(m);
  a.expand(a.frontier().front());
  a.expand(a.frontier().front());
  IncrementalGraphBuilder builder(alphabet);
  builder.update(a);
  ExplorationState b(m);
  CHECK_THROWS_AS(builder.update(b), ContractViolation);
}

TEST_CASE("placeholder rows carry only the phase bits") {
  const auto m = generate_benchmark({Domain::BW, 2, 2});
  const NormalizedAlphabet alphabet(m);
  ExplorationState es(m);
  RandomPolicy random;
  Rng rng(9);
  for (int step = 0; step < 30 && !es.frontier().empty(); ++step) {
    const auto g = build_graph(es, alphabet);
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      const auto row = g.node_features.row(static_cast<Eigen::Index>(v));
      if (!es.is_discovered(g.node_states[v])) {
        CHECK(row.head(4).isZero());
        CHECK(row[4] == double(es.phase().marked_found));
        CHECK(row[5] == double(es.phase().winning_exists));
        CHECK(row[6] == double(es.phase().losing_exists));
      }
    }
    es.expand(random.select(es, rng));
  }
}

TEST_CASE("k-hop neighborhoods match an independent breadth-first oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = testing::random_graph(rng, 1 + trial % 25, trial % 40);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(g.num_nodes() - 1));
    std::vector<std::uint32_t> seeds{pick(rng)};
    if (trial % 2) seeds.push_back(pick(rng));
    std::set<std::uint32_t> previous;
    for (std::size_t k = 0; k <= 4; ++k) {
      const auto sub = khop_subgraph(g, seeds, k);
      const auto expected = testing::reachable_within(g, seeds, k);
      const std::set<std::uint32_t> nodes(sub.node_map.begin(), sub.node_map.end());
      REQUIRE(nodes == expected);
      REQUIRE(std::includes(nodes.begin(), nodes.end(), previous.begin(), previous.end()));
      previous = nodes;
      std::size_t induced = 0;
      for (const auto& e : g.edges) induced += nodes.count(e.source) && nodes.count(e.target);
      REQUIRE(sub.graph.num_edges() == induced);
      for (std::size_t i = 0; i < sub.edge_map.size(); ++i) {
        const auto& orig = g.edges[sub.edge_map[i]];
        REQUIRE(sub.node_map[sub.graph.edges[i].source] == orig.source);
        REQUIRE(sub.node_map[sub.graph.edges[i].target] == orig.target);
        REQUIRE(sub.graph.edge_features.row(static_cast<Eigen::Index>(i)) ==
                g.edge_features.row(static_cast<Eigen::Index>(sub.edge_map[i])));
      }
    }
  }
}

TEST_CASE("zero hops keep only the seeds") {
  std::mt19937_64 rng(3);
  const auto g = testing::random_graph(rng, 10, 20);
  const auto sub = khop_subgraph(g, {2, 5}, 0);
  CHECK(sub.node_map == std::vector<std::uint32_t>{2, 5});
  for (const auto& e : sub.graph.edges) {
    CHECK(e.source < 2);
    CHECK(e.target < 2);
  }
}

TEST_CASE("hops beyond the diameter return the whole graph") {
  const auto m = generate_benchmark({Domain::DP, 2, 1});
  const NormalizedAlphabet alphabet(m);
  ExplorationState es(m);
  for (int i = 0; i < 10; ++i) es.expand(es.frontier().front());
  const auto g = build_graph(es, alphabet);
  const auto sub = khop_subgraph(g, frontier_endpoints(g), g.num_nodes());
  CHECK(sub.graph == g);
}

TEST_CASE("invalid seeds") {
  std::mt19937_64 rng(3);
  const auto g = testing::random_graph(rng, 4, 3);
  CHECK_THROWS_AS(khop_subgraph(g, {}, 1), ContractViolation);
  CHECK_THROWS_AS(khop_subgraph(g, {4}, 1), ContractViolation);
}

TEST_CASE("JSON dump") {
  const auto m = generate_benchmark({Domain::TL, 1, 1});
  const NormalizedAlphabet alphabet(m);
  ExplorationState es(m);
  es.expand(es.frontier().front());
  const auto g = build_graph(es, alphabet);
  const auto j = graph_to_json(g, es);
  CHECK(j.at("format") == "dcs-graph");
  CHECK(j.at("nodes").size() == g.num_nodes());
  CHECK(j.at("edges").size() == g.num_edges());
  CHECK(j.at("frontier").get<std::vector<std::size_t>>() == g.frontier);
  CHECK(j.at("edge_features").size() == g.num_edges());
  CHECK(j.at("node_features")[0].size() == kNodeFeatureDim);
}

}  // TEST_SUITE
