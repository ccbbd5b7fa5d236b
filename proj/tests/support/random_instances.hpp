#pragma once

// Seeded generators for randomized correctness suites. Kept independent of
// the engine's own generators so they can serve as neutral test inputs.

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "bdsm/graph.hpp"
#include "bdsm/query_graph.hpp"

namespace testgen {

struct GraphSpec {
  std::size_t vertices = 20;
  std::size_t edges = 40;
  std::size_t labels = 3;
  bool edge_labels = false;
  std::size_t edge_label_count = 2;
};

inline bdsm::LabeledGraph random_graph(const GraphSpec& spec, std::mt19937_64& rng) {
  std::vector<bdsm::VertexRecord> vertices;
  for (bdsm::VertexId v = 0; v < spec.vertices; ++v) {
    vertices.push_back({v, static_cast<bdsm::LabelId>(rng() % spec.labels)});
  }
  std::set<std::pair<bdsm::VertexId, bdsm::VertexId>> used;
  std::vector<bdsm::EdgeRecord> edges;
  std::size_t max_edges = spec.vertices * (spec.vertices - 1) / 2;
  std::size_t want = std::min(spec.edges, max_edges);
  while (edges.size() < want) {
    auto u = static_cast<bdsm::VertexId>(rng() % spec.vertices);
    auto v = static_cast<bdsm::VertexId>(rng() % spec.vertices);
    if (u == v) continue;
    auto key = std::minmax(u, v);
    if (!used.insert(key).second) continue;
    std::optional<bdsm::LabelId> el;
    if (spec.edge_labels) el = static_cast<bdsm::LabelId>(rng() % spec.edge_label_count);
    edges.push_back({u, v, el});
  }
  return bdsm::LabeledGraph::build_from_edges(vertices, edges);
}

// Connected random query over the same label alphabet (not extracted from
// the data graph; label-compatible by construction).
inline bdsm::QueryGraph random_query(std::size_t size, std::size_t labels, std::mt19937_64& rng,
                                     double extra_edge_prob = 0.4,
                                     std::size_t uniform_label_bias = 0) {
  std::vector<bdsm::LabelId> vlabels;
  for (std::size_t i = 0; i < size; ++i) {
    bdsm::LabelId l = static_cast<bdsm::LabelId>(rng() % labels);
    if (uniform_label_bias && rng() % uniform_label_bias == 0) l = 0;
    vlabels.push_back(l);
  }
  std::vector<bdsm::QueryEdge> edges;
  std::set<std::pair<bdsm::QueryVertexId, bdsm::QueryVertexId>> used;
  for (bdsm::QueryVertexId u = 1; u < size; ++u) {
    auto parent = static_cast<bdsm::QueryVertexId>(rng() % u);
    edges.push_back({parent, u, {}});
    used.insert({parent, u});
  }
  for (bdsm::QueryVertexId u = 0; u < size; ++u) {
    for (bdsm::QueryVertexId v = u + 1; v < size; ++v) {
      if (used.count({u, v})) continue;
      if (std::uniform_real_distribution<double>(0, 1)(rng) < extra_edge_prob) {
        edges.push_back({u, v, {}});
        used.insert({u, v});
      }
    }
  }
  return bdsm::QueryGraph(std::move(vlabels), std::move(edges));
}

// Valid random batch against g: deletions of present edges, insertions of
// absent ones, no two updates on one pair.
inline bdsm::UpdateBatch random_batch(const bdsm::LabeledGraph& g, std::size_t size,
                                      std::mt19937_64& rng, bool edge_labels = false,
                                      std::size_t edge_label_count = 2) {
  std::vector<std::pair<bdsm::VertexId, bdsm::VertexId>> present;
  for (bdsm::VertexId v = 0; v < g.vertex_count(); ++v) {
    for (bdsm::VertexId w : g.neighbors(v)) {
      if (v < w) present.emplace_back(v, w);
    }
  }
  std::set<std::uint64_t> touched;
  std::vector<bdsm::EdgeUpdate> updates;
  std::size_t guard = 0;
  while (updates.size() < size && guard++ < 10000) {
    bool remove = !present.empty() && rng() % 2 == 0;
    if (remove) {
      auto [u, v] = present[rng() % present.size()];
      if (!touched.insert(bdsm::edge_pair_key(u, v)).second) continue;
      updates.push_back({bdsm::EdgeUpdate::Op::kDelete, u, v, {}, 0});
    } else {
      auto u = static_cast<bdsm::VertexId>(rng() % g.vertex_count());
      auto v = static_cast<bdsm::VertexId>(rng() % g.vertex_count());
      if (u == v || g.has_edge(u, v)) continue;
      if (!touched.insert(bdsm::edge_pair_key(u, v)).second) continue;
      std::optional<bdsm::LabelId> el;
      if (edge_labels) el = static_cast<bdsm::LabelId>(rng() % edge_label_count);
      updates.push_back({bdsm::EdgeUpdate::Op::kInsert, u, v, el, 0});
    }
  }
  return bdsm::UpdateBatch(std::move(updates));
}

}  // namespace testgen
