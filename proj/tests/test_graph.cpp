#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "bdsm/graph.hpp"
#include "support/fig1.hpp"
#include "support/random_instances.hpp"

using namespace bdsm;

TEST_CASE("build rejects duplicates, self-loops and unknown vertices") {
  std::vector<VertexRecord> vs = {{0, 1}, {1, 2}};
  CHECK_THROWS_AS(LabeledGraph::build_from_edges(vs, {{0, 0, {}}}), std::invalid_argument);
  CHECK_THROWS_AS(LabeledGraph::build_from_edges(vs, {{0, 5, {}}}), std::invalid_argument);
  CHECK_THROWS_AS(LabeledGraph::build_from_edges(vs, {{0, 1, {}}, {1, 0, {}}}),
                  std::invalid_argument);
}

TEST_CASE("empty edge list keeps isolated vertices and an empty store") {
  auto g = LabeledGraph::build_from_edges({{0, 1}, {1, 1}, {2, 2}}, {});
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 0);
  CHECK(g.neighbors(0).empty());
  CHECK(g.degree(1) == 0);
  CHECK(g.pma().size() == 0);
}

TEST_CASE("running-example graph exposes the documented structure") {
  auto g = fig1::data_graph();
  CHECK(g.vertex_count() == 10);
  CHECK(g.edge_count() == 13);
  CHECK(g.degree(1) >= 2);
  CHECK(g.has_edge(1, 5));
  CHECK(g.has_edge(5, 1));
  CHECK(g.label(1) == fig1::kA);
  // v1's match image involves v5, v6, v9
  CHECK(g.has_edge(1, 6));
  CHECK(g.has_edge(5, 6));
  CHECK(g.has_edge(5, 9));
  CHECK(g.neighbors_with_label(0, fig1::kB) == std::vector<VertexId>{3, 4, 6});
}

TEST_CASE("apply_batch updates both directions and edge presence") {
  auto g = fig1::data_graph();
  g.apply_batch(fig1::batch());
  CHECK(g.has_edge(0, 2));
  CHECK(g.has_edge(2, 0));
  CHECK(g.has_edge(1, 4));
  CHECK_FALSE(g.has_edge(4, 5));
  CHECK_FALSE(g.has_edge(5, 4));
  CHECK(g.edge_count() == 14);
  CHECK(g.pma().check_sorted());
  CHECK(g.pma().check_density());
  SUBCASE("neighbor gained by the insertion carries label A") {
    auto with_a = g.neighbors_with_label(2, fig1::kA);
    CHECK(with_a == std::vector<VertexId>{0});
  }
}

TEST_CASE("batch with conflicting updates on one edge is rejected at construction") {
  using Op = EdgeUpdate::Op;
  CHECK_THROWS_AS(UpdateBatch({{Op::kInsert, 0, 2, {}, 0}, {Op::kDelete, 2, 0, {}, 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(UpdateBatch({{Op::kInsert, 1, 1, {}, 0}}), std::invalid_argument);
}

TEST_CASE("invalid updates reject the whole batch and leave the graph untouched") {
  auto g = fig1::data_graph();
  using Op = EdgeUpdate::Op;
  UpdateBatch bad({{Op::kInsert, 0, 2, {}, 0},    // fine
                   {Op::kInsert, 1, 5, {}, 0},    // already present
                   {Op::kDelete, 7, 9, {}, 0}});  // missing
  CHECK_THROWS_AS(g.apply_batch(bad), BatchError);
  try {
    g.apply_batch(bad);
  } catch (const BatchError& e) {
    CHECK(e.failures.size() == 2);
    CHECK(e.failures[0].index == 1);
    CHECK(e.failures[1].index == 2);
  }
  CHECK_FALSE(g.has_edge(0, 2));  // nothing applied
  CHECK(g.edge_count() == 13);
}

TEST_CASE("insert-then-delete round trip restores the original edge set") {
  auto g = fig1::data_graph();
  using Op = EdgeUpdate::Op;
  UpdateBatch fwd({{Op::kInsert, 0, 2, {}, 0}, {Op::kInsert, 7, 8, {}, 0}});
  auto before = g.pma().occupied_keys();
  g.apply_batch(fwd);
  g.apply_batch(fwd.inverse());
  CHECK(g.pma().occupied_keys() == before);
}

TEST_CASE("neighbors are sorted ascending and degree matches") {
  std::mt19937_64 rng(5);
  auto g = testgen::random_graph({30, 60, 3}, rng);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    auto nbrs = g.neighbors(v);
    CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));
    CHECK(nbrs.size() == g.degree(v));
  }
  CHECK_THROWS_AS(g.neighbors(1000), std::out_of_range);
}

TEST_CASE("random update replay equals a hash-set adjacency oracle") {
  std::mt19937_64 rng(11);
  auto g = testgen::random_graph({50, 120, 4}, rng);
  std::set<std::pair<VertexId, VertexId>> oracle;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    for (VertexId w : g.neighbors(v)) oracle.insert({v, w});
  }
  for (int round = 0; round < 1000; ++round) {
    auto batch = testgen::random_batch(g, 1, rng);
    if (batch.empty()) continue;
    g.apply_batch(batch);
    for (const EdgeUpdate& up : batch.updates()) {
      if (up.is_insert()) {
        oracle.insert({up.u, up.v});
        oracle.insert({up.v, up.u});
      } else {
        oracle.erase({up.u, up.v});
        oracle.erase({up.v, up.u});
      }
    }
  }
  std::set<std::pair<VertexId, VertexId>> got;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    for (VertexId w : g.neighbors(v)) got.insert({v, w});
  }
  CHECK(got == oracle);
  SUBCASE("symmetry holds for every pair") {
    for (VertexId u = 0; u < g.vertex_count(); ++u) {
      for (VertexId v = 0; v < g.vertex_count(); ++v) {
        CHECK(g.has_edge(u, v) == g.has_edge(v, u));
      }
    }
  }
}

TEST_CASE("locate_segment on the graph store matches the pma oracle") {
  auto g = fig1::data_graph();
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    CHECK(g.locate_segment(u, 0) == g.pma().locate_segment_linear(pma_key(u, 0)));
  }
}

TEST_CASE("edge labels follow inserts and deletes") {
  auto g = LabeledGraph::build_from_edges({{0, 1}, {1, 1}, {2, 1}},
                                          {{0, 1, 7u}, {1, 2, 8u}});
  CHECK(g.edge_label(0, 1) == LabelId{7});
  CHECK(g.edge_label(1, 0) == LabelId{7});
  using Op = EdgeUpdate::Op;
  g.apply_batch(UpdateBatch({{Op::kDelete, 0, 1, {}, 0}, {Op::kInsert, 0, 2, 9u, 0}}));
  CHECK_FALSE(g.edge_label(0, 1).has_value());
  CHECK(g.edge_label(0, 2) == LabelId{9});
}
