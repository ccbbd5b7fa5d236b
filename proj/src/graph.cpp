#include "bdsm/graph.hpp"

#include <algorithm>
#include <unordered_set>

namespace bdsm {

UpdateBatch::UpdateBatch(std::vector<EdgeUpdate> updates) : updates_(std::move(updates)) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(updates_.size() * 2);
  for (std::size_t i = 0; i < updates_.size(); ++i) {
    EdgeUpdate& up = updates_[i];
    if (up.u == up.v) {
      throw std::invalid_argument("self-loop update (" + std::to_string(up.u) + "," +
                                  std::to_string(up.v) + ")");
    }
    if (!seen.insert(edge_pair_key(up.u, up.v)).second) {
      throw std::invalid_argument("conflicting updates on edge (" + std::to_string(up.u) +
                                  "," + std::to_string(up.v) + ") within one batch");
    }
    up.order = static_cast<std::uint32_t>(i);
  }
}

UpdateBatch UpdateBatch::inverse() const {
  std::vector<EdgeUpdate> inv;
  inv.reserve(updates_.size());
  for (const EdgeUpdate& up : updates_) {
    inv.push_back({up.is_insert() ? EdgeUpdate::Op::kDelete : EdgeUpdate::Op::kInsert,
                   up.u, up.v, up.edge_label, 0});
  }
  return UpdateBatch(std::move(inv));
}

LabeledGraph LabeledGraph::build_from_edges(const std::vector<VertexRecord>& vertices,
                                            const std::vector<EdgeRecord>& edges) {
  LabeledGraph g;
  g.labels_.assign(vertices.size(), kNoLabel);
  for (const VertexRecord& rec : vertices) {
    if (rec.id >= vertices.size() || g.labels_[rec.id] != kNoLabel) {
      throw std::invalid_argument("vertex ids must be dense 0-based and unique (got " +
                                  std::to_string(rec.id) + ")");
    }
    g.labels_[rec.id] = rec.label;
    g.max_label_ = std::max(g.max_label_, rec.label);
  }

  std::vector<PmaKey> keys;
  keys.reserve(edges.size() * 2);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  for (const EdgeRecord& e : edges) {
    if (e.u == e.v) {
      throw std::invalid_argument("self-loop edge (" + std::to_string(e.u) + "," +
                                  std::to_string(e.v) + ")");
    }
    if (e.u >= g.labels_.size() || e.v >= g.labels_.size()) {
      throw std::invalid_argument("edge (" + std::to_string(e.u) + "," +
                                  std::to_string(e.v) + ") references unknown vertex");
    }
    if (!seen.insert(edge_pair_key(e.u, e.v)).second) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(e.u) + "," +
                                  std::to_string(e.v) + ")");
    }
    keys.push_back(pma_key(e.u, e.v));
    keys.push_back(pma_key(e.v, e.u));
    if (e.label) g.edge_labels_[edge_pair_key(e.u, e.v)] = *e.label;
  }
  std::sort(keys.begin(), keys.end());
  g.pma_ = PackedMemoryArray::from_sorted(keys);
  return g;
}

void LabeledGraph::check_vertex(VertexId v) const {
  if (v >= labels_.size()) {
    throw std::out_of_range("unknown vertex " + std::to_string(v));
  }
}

LabelId LabeledGraph::label(VertexId v) const {
  check_vertex(v);
  return labels_[v];
}

bool LabeledGraph::has_edge(VertexId u, VertexId v) const {
  check_vertex(u);
  check_vertex(v);
  return pma_.contains(pma_key(u, v));
}

std::optional<LabelId> LabeledGraph::edge_label(VertexId u, VertexId v) const {
  auto it = edge_labels_.find(edge_pair_key(u, v));
  if (it == edge_labels_.end()) return std::nullopt;
  return it->second;
}

std::vector<VertexId> LabeledGraph::neighbors(VertexId v) const {
  std::vector<VertexId> out;
  for_each_neighbor(v, [&](VertexId w) { out.push_back(w); });
  return out;
}

std::vector<VertexId> LabeledGraph::neighbors_with_label(VertexId v, LabelId l) const {
  std::vector<VertexId> out;
  for_each_neighbor(v, [&](VertexId w) {
    if (labels_[w] == l) out.push_back(w);
  });
  return out;
}

std::size_t LabeledGraph::degree(VertexId v) const {
  std::size_t d = 0;
  for_each_neighbor(v, [&](VertexId) { ++d; });
  return d;
}

std::vector<UpdateError> LabeledGraph::validate_batch(const UpdateBatch& batch) const {
  std::vector<UpdateError> failures;
  for (std::size_t i = 0; i < batch.updates().size(); ++i) {
    const EdgeUpdate& up = batch.updates()[i];
    if (up.u >= labels_.size() || up.v >= labels_.size()) {
      failures.push_back({i, "unknown vertex"});
      continue;
    }
    bool present = pma_.contains(pma_key(up.u, up.v));
    if (up.is_insert() && present) {
      failures.push_back({i, "insert of existing edge (" + std::to_string(up.u) + "," +
                                 std::to_string(up.v) + ")"});
    } else if (!up.is_insert() && !present) {
      failures.push_back({i, "delete of missing edge (" + std::to_string(up.u) + "," +
                                 std::to_string(up.v) + ")"});
    }
  }
  return failures;
}

void LabeledGraph::apply_batch(const UpdateBatch& batch) {
  std::vector<UpdateError> failures = validate_batch(batch);
  if (!failures.empty()) {
    throw BatchError("batch rejected: " + std::to_string(failures.size()) +
                         " invalid update(s), none applied",
                     std::move(failures));
  }

  std::vector<PmaKey> inserts;
  std::vector<PmaKey> erases;
  for (const EdgeUpdate& up : batch.updates()) {
    auto& target = up.is_insert() ? inserts : erases;
    target.push_back(pma_key(up.u, up.v));
    target.push_back(pma_key(up.v, up.u));
    if (up.is_insert()) {
      if (up.edge_label) edge_labels_[edge_pair_key(up.u, up.v)] = *up.edge_label;
    } else {
      edge_labels_.erase(edge_pair_key(up.u, up.v));
    }
  }
  pma_.apply(std::move(inserts), std::move(erases));
}

}  // namespace bdsm
