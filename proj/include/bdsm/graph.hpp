#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdsm/pma.hpp"
#include "bdsm/types.hpp"

namespace bdsm {

struct EdgeUpdate {
  enum class Op { kInsert, kDelete };
  Op op;
  VertexId u;
  VertexId v;
  std::optional<LabelId> edge_label;
  std::uint32_t order = 0;  // position within the batch, total order

  bool is_insert() const { return op == Op::kInsert; }
};

// An ordered set of edge updates. Two updates touching the same unordered
// vertex pair conflict and are rejected: batch semantics disregard intra-batch
// ordering, so such a batch has no well-defined effect.
class UpdateBatch {
 public:
  explicit UpdateBatch(std::vector<EdgeUpdate> updates);

  const std::vector<EdgeUpdate>& updates() const { return updates_; }
  std::size_t size() const { return updates_.size(); }
  bool empty() const { return updates_.empty(); }

  UpdateBatch inverse() const;

 private:
  std::vector<EdgeUpdate> updates_;
};

struct UpdateError {
  std::size_t index;  // position in the batch
  std::string reason;
};

class BatchError : public std::runtime_error {
 public:
  BatchError(std::string what, std::vector<UpdateError> failures)
      : std::runtime_error(std::move(what)), failures(std::move(failures)) {}
  std::vector<UpdateError> failures;
};

struct VertexRecord {
  VertexId id;
  LabelId label;
};

struct EdgeRecord {
  VertexId u;
  VertexId v;
  std::optional<LabelId> label;
};

// Undirected, simple, vertex-labeled (optionally edge-labeled) graph backed
// by a packed memory array holding both directed copies of every edge.
class LabeledGraph {
 public:
  static LabeledGraph build_from_edges(const std::vector<VertexRecord>& vertices,
                                       const std::vector<EdgeRecord>& edges);

  std::size_t vertex_count() const { return labels_.size(); }
  std::size_t edge_count() const { return pma_.size() / 2; }
  LabelId label(VertexId v) const;
  LabelId max_label() const { return max_label_; }

  bool has_edge(VertexId u, VertexId v) const;
  std::optional<LabelId> edge_label(VertexId u, VertexId v) const;
  bool has_edge_labels() const { return !edge_labels_.empty(); }

  std::vector<VertexId> neighbors(VertexId v) const;
  std::vector<VertexId> neighbors_with_label(VertexId v, LabelId l) const;
  std::size_t degree(VertexId v) const;

  template <typename Fn>
  void for_each_neighbor(VertexId v, Fn&& fn) const {
    check_vertex(v);
    pma_.scan(pma_key(v, 0), pma_key(v + 1, 0),
              [&](PmaKey k) { fn(pma_dst(k)); });
  }

  // One entry per invalid update: insertion of an existing edge, deletion of
  // a missing edge, or an unknown endpoint.
  std::vector<UpdateError> validate_batch(const UpdateBatch& batch) const;

  // Applies the batch in place, all-or-nothing. Throws BatchError listing
  // every offending update when any insertion already exists, any deletion
  // is missing, or an endpoint is unknown.
  void apply_batch(const UpdateBatch& batch);

  std::size_t locate_segment(VertexId u, VertexId v) const {
    return pma_.locate_segment(pma_key(u, v));
  }

  const PackedMemoryArray& pma() const { return pma_; }

 private:
  void check_vertex(VertexId v) const;

  std::vector<LabelId> labels_;
  PackedMemoryArray pma_;
  std::unordered_map<std::uint64_t, LabelId> edge_labels_;
  LabelId max_label_ = 0;
};

}  // namespace bdsm
