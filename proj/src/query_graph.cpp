#include "bdsm/query_graph.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace bdsm {

QueryGraph::QueryGraph(std::vector<LabelId> vertex_labels, std::vector<QueryEdge> edges)
    : labels_(std::move(vertex_labels)), edges_(std::move(edges)) {
  std::size_t n = labels_.size();
  if (n == 0) throw std::invalid_argument("empty query graph");
  if (n > 32) throw std::invalid_argument("query graph too large");
  adj_.assign(n, 0);
  nbrs_.assign(n, {});
  for (const QueryEdge& e : edges_) {
    if (e.a >= n || e.b >= n) throw std::invalid_argument("query edge references unknown vertex");
    if (e.a == e.b) throw std::invalid_argument("query self-loop");
    if (adjacent(e.a, e.b)) throw std::invalid_argument("duplicate query edge");
    adj_[e.a] |= 1u << e.b;
    adj_[e.b] |= 1u << e.a;
    nbrs_[e.a].push_back(e.b);
    nbrs_[e.b].push_back(e.a);
  }
  for (auto& list : nbrs_) std::sort(list.begin(), list.end());
}

int QueryGraph::edge_index(QueryVertexId u, QueryVertexId v) const {
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const QueryEdge& e = edges_[i];
    if ((e.a == u && e.b == v) || (e.a == v && e.b == u)) return static_cast<int>(i);
  }
  return -1;
}

std::optional<LabelId> QueryGraph::edge_label(QueryVertexId u, QueryVertexId v) const {
  int i = edge_index(u, v);
  if (i < 0) return std::nullopt;
  return edges_[static_cast<std::size_t>(i)].label;
}

bool QueryGraph::connected() const {
  std::uint32_t seen = 1;
  std::uint32_t frontier = 1;
  while (frontier != 0) {
    std::uint32_t next = 0;
    for (std::size_t u = 0; u < labels_.size(); ++u) {
      if ((frontier >> u) & 1u) next |= adj_[u];
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == (labels_.size() == 32 ? ~0u : (1u << labels_.size()) - 1);
}

std::vector<std::pair<LabelId, std::uint32_t>> QueryGraph::neighbor_label_counts(
    QueryVertexId u) const {
  std::map<LabelId, std::uint32_t> counts;
  for (QueryVertexId w : nbrs_[u]) ++counts[labels_[w]];
  return {counts.begin(), counts.end()};
}

}  // namespace bdsm
