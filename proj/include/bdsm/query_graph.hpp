#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bdsm/types.hpp"

namespace bdsm {

struct QueryEdge {
  QueryVertexId a;
  QueryVertexId b;
  std::optional<LabelId> label;

  bool touches(QueryVertexId u) const { return a == u || b == u; }
  QueryVertexId other(QueryVertexId u) const { return a == u ? b : a; }
};

// Small connected simple query pattern. Vertex count is expected to stay
// within 12 for plan analysis; adjacency is kept as per-vertex bitmasks.
class QueryGraph {
 public:
  QueryGraph(std::vector<LabelId> vertex_labels, std::vector<QueryEdge> edges);

  std::size_t vertex_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  LabelId label(QueryVertexId u) const { return labels_[u]; }
  const std::vector<LabelId>& labels() const { return labels_; }
  const std::vector<QueryEdge>& edges() const { return edges_; }
  const QueryEdge& edge(std::size_t i) const { return edges_[i]; }

  bool adjacent(QueryVertexId u, QueryVertexId v) const {
    return (adj_[u] >> v) & 1u;
  }
  std::uint32_t neighbor_mask(QueryVertexId u) const { return adj_[u]; }
  const std::vector<QueryVertexId>& neighbors(QueryVertexId u) const {
    return nbrs_[u];
  }
  std::size_t degree(QueryVertexId u) const { return nbrs_[u].size(); }

  // Edge index of (u, v) in either orientation, or -1.
  int edge_index(QueryVertexId u, QueryVertexId v) const;
  std::optional<LabelId> edge_label(QueryVertexId u, QueryVertexId v) const;

  bool connected() const;

  // Count of u's query neighbors carrying each label, used by the encoder
  // and by prioritized-edge dominance checks.
  std::vector<std::pair<LabelId, std::uint32_t>> neighbor_label_counts(QueryVertexId u) const;

 private:
  std::vector<LabelId> labels_;
  std::vector<QueryEdge> edges_;
  std::vector<std::uint32_t> adj_;
  std::vector<std::vector<QueryVertexId>> nbrs_;
};

}  // namespace bdsm
