#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdsm/graph.hpp"
#include "bdsm/query_graph.hpp"
#include "bdsm/types.hpp"

namespace bdsm {

// K-bit neighborhood-label encoding: the first N bits hold the vertex label,
// followed by one M-bit saturating counter per label present in the query
// (ascending label order). Labels absent from the query are not encoded.
struct EncodingScheme {
  std::uint32_t label_bits;   // N
  std::uint32_t group_bits;   // M
  std::vector<LabelId> query_labels;

  std::uint32_t total_bits() const {
    return label_bits + group_bits * static_cast<std::uint32_t>(query_labels.size());
  }
  std::uint32_t group_cap() const { return (1u << group_bits) - 1; }
  int group_index(LabelId l) const;

  bool operator==(const EncodingScheme&) const = default;
};

EncodingScheme build_scheme(const QueryGraph& query, LabelId max_label,
                            std::uint32_t group_bits = 2);

class VertexEncoding {
 public:
  VertexEncoding() = default;
  explicit VertexEncoding(const EncodingScheme& scheme);

  std::uint32_t label_value(const EncodingScheme& scheme) const {
    return get_field(0, scheme.label_bits);
  }
  std::uint32_t group_value(const EncodingScheme& scheme, std::size_t group) const {
    return get_field(scheme.label_bits + group * scheme.group_bits, scheme.group_bits);
  }
  void set_label(const EncodingScheme& scheme, std::uint32_t value) {
    set_field(0, scheme.label_bits, value);
  }
  void set_group(const EncodingScheme& scheme, std::size_t group, std::uint32_t value) {
    set_field(scheme.label_bits + group * scheme.group_bits, scheme.group_bits, value);
  }

  // Bit string in field order, e.g. "001001100" for the 9-bit layout.
  std::string to_bit_string(const EncodingScheme& scheme) const;

  bool operator==(const VertexEncoding&) const = default;

 private:
  std::uint32_t get_field(std::uint32_t first_bit, std::uint32_t width) const;
  void set_field(std::uint32_t first_bit, std::uint32_t width, std::uint32_t value);

  std::vector<std::uint64_t> words_;
};

VertexEncoding encode_vertex(const LabeledGraph& g, VertexId v, const EncodingScheme& scheme);
std::vector<VertexEncoding> encode_all(const LabeledGraph& g, const EncodingScheme& scheme);
std::vector<VertexEncoding> encode_query(const QueryGraph& q, const EncodingScheme& scheme);

// Containment test: v (data) can host u (query) iff the label fields match
// and every counter of v is at least the matching counter of u.
bool encoding_contains(const VertexEncoding& query_enc, const VertexEncoding& data_enc,
                       const EncodingScheme& scheme);

// Recomputes encodings of vertices incident to the batch against the
// post-update graph; returns the vertices whose encoding actually changed
// (saturated counters that stay at the cap are not dirty).
std::vector<VertexId> incremental_reencode(const LabeledGraph& g_after,
                                           const UpdateBatch& batch,
                                           const EncodingScheme& scheme,
                                           std::vector<VertexEncoding>& encodings);

// Per data vertex one bitmask over query vertices, with per-query-vertex
// sorted candidate columns kept alongside for candidate generation.
class CandidateTable {
 public:
  CandidateTable() = default;

  static CandidateTable build(const std::vector<VertexEncoding>& data_encodings,
                              const std::vector<VertexEncoding>& query_encodings,
                              const EncodingScheme& scheme);

  void refresh(const std::vector<VertexId>& dirty,
               const std::vector<VertexEncoding>& data_encodings,
               const std::vector<VertexEncoding>& query_encodings,
               const EncodingScheme& scheme);

  bool is_candidate(VertexId v, QueryVertexId u) const {
    return (rows_[v] >> u) & 1u;
  }
  std::uint32_t row(VertexId v) const { return rows_[v]; }
  const std::vector<VertexId>& column(QueryVertexId u) const { return columns_[u]; }
  std::size_t query_vertex_count() const { return columns_.size(); }
  std::size_t data_vertex_count() const { return rows_.size(); }

  bool operator==(const CandidateTable&) const = default;

 private:
  static std::uint32_t compute_row(const VertexEncoding& data_enc,
                                   const std::vector<VertexEncoding>& query_encodings,
                                   const EncodingScheme& scheme);

  std::vector<std::uint32_t> rows_;
  std::vector<std::vector<VertexId>> columns_;
};

}  // namespace bdsm
