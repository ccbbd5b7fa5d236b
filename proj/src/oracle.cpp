#include "bdsm/oracle.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>

namespace bdsm {
namespace oracle {

namespace {

constexpr std::size_t kScaleGuard = 60;

struct NaiveGraph {
  std::vector<LabelId> labels;
  std::vector<std::set<VertexId>> adj;
  std::map<std::pair<VertexId, VertexId>, LabelId> edge_labels;

  static NaiveGraph from(const LabeledGraph& g) {
    NaiveGraph n;
    n.labels.resize(g.vertex_count());
    n.adj.resize(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      n.labels[v] = g.label(v);
      for (VertexId w : g.neighbors(v)) {
        n.adj[v].insert(w);
        auto el = g.edge_label(v, w);
        if (el) n.edge_labels[{std::min(v, w), std::max(v, w)}] = *el;
      }
    }
    return n;
  }

  bool has_edge(VertexId a, VertexId b) const { return adj[a].count(b) > 0; }
  std::optional<LabelId> edge_label(VertexId a, VertexId b) const {
    auto it = edge_labels.find({std::min(a, b), std::max(a, b)});
    if (it == edge_labels.end()) return std::nullopt;
    return it->second;
  }

  void apply(const UpdateBatch& batch) {
    for (const EdgeUpdate& up : batch.updates()) {
      if (up.is_insert()) {
        adj[up.u].insert(up.v);
        adj[up.v].insert(up.u);
        if (up.edge_label) {
          edge_labels[{std::min(up.u, up.v), std::max(up.u, up.v)}] = *up.edge_label;
        }
      } else {
        adj[up.u].erase(up.v);
        adj[up.v].erase(up.u);
        edge_labels.erase({std::min(up.u, up.v), std::max(up.u, up.v)});
      }
    }
  }
};

void backtrack(const NaiveGraph& g, const QueryGraph& q, std::vector<VertexId>& image,
               QueryVertexId u, std::vector<Match>& out) {
  if (u == q.vertex_count()) {
    out.push_back(Match{image});
    return;
  }
  for (VertexId v = 0; v < g.labels.size(); ++v) {
    if (g.labels[v] != q.label(u)) continue;
    bool ok = true;
    for (QueryVertexId w = 0; w < u && ok; ++w) {
      if (image[w] == v) ok = false;
    }
    for (QueryVertexId w = 0; w < u && ok; ++w) {
      if (!q.adjacent(w, u)) continue;
      if (!g.has_edge(image[w], v) || q.edge_label(w, u) != g.edge_label(image[w], v)) {
        ok = false;
      }
    }
    if (!ok) continue;
    image[u] = v;
    backtrack(g, q, image, u + 1, out);
  }
}

std::vector<Match> enumerate(const NaiveGraph& g, const QueryGraph& q) {
  if (g.labels.size() > kScaleGuard) {
    throw std::invalid_argument("oracle scale guard exceeded");
  }
  std::vector<Match> out;
  std::vector<VertexId> image(q.vertex_count(), kInvalidVertex);
  backtrack(g, q, image, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

MatchSet enumerate_all_matches(const LabeledGraph& g, const QueryGraph& q) {
  return MatchSet{enumerate(NaiveGraph::from(g), q)};
}

IncrementalDiff incremental_diff_oracle(const LabeledGraph& g, const UpdateBatch& batch,
                                        const QueryGraph& q) {
  NaiveGraph before = NaiveGraph::from(g);
  NaiveGraph after = before;
  after.apply(batch);
  std::vector<Match> m_before = enumerate(before, q);
  std::vector<Match> m_after = enumerate(after, q);
  IncrementalDiff diff;
  std::set_difference(m_after.begin(), m_after.end(), m_before.begin(), m_before.end(),
                      std::back_inserter(diff.positive));
  std::set_difference(m_before.begin(), m_before.end(), m_after.begin(), m_after.end(),
                      std::back_inserter(diff.negative));
  return diff;
}

}  // namespace oracle
}  // namespace bdsm
