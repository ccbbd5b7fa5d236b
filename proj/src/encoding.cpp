#include "bdsm/encoding.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace bdsm {

int EncodingScheme::group_index(LabelId l) const {
  auto it = std::lower_bound(query_labels.begin(), query_labels.end(), l);
  if (it == query_labels.end() || *it != l) return -1;
  return static_cast<int>(it - query_labels.begin());
}

EncodingScheme build_scheme(const QueryGraph& query, LabelId max_label,
                            std::uint32_t group_bits) {
  std::set<LabelId> labels(query.labels().begin(), query.labels().end());
  std::uint32_t n = static_cast<std::uint32_t>(std::bit_width(static_cast<std::uint64_t>(max_label) + 1));
  if ((static_cast<std::uint64_t>(max_label) + 1) == (std::uint64_t{1} << (n - 1))) --n;
  n = std::max(n, 1u);
  return EncodingScheme{n, group_bits, {labels.begin(), labels.end()}};
}

VertexEncoding::VertexEncoding(const EncodingScheme& scheme) {
  words_.assign((scheme.total_bits() + 63) / 64, 0);
}

std::uint32_t VertexEncoding::get_field(std::uint32_t first_bit, std::uint32_t width) const {
  std::uint32_t value = 0;
  for (std::uint32_t i = 0; i < width; ++i) {
    std::uint32_t bit = first_bit + i;
    std::uint64_t w = words_[bit / 64];
    value = (value << 1) | static_cast<std::uint32_t>((w >> (bit % 64)) & 1u);
  }
  return value;
}

void VertexEncoding::set_field(std::uint32_t first_bit, std::uint32_t width,
                               std::uint32_t value) {
  for (std::uint32_t i = 0; i < width; ++i) {
    std::uint32_t bit = first_bit + i;
    std::uint64_t mask = std::uint64_t{1} << (bit % 64);
    bool on = (value >> (width - 1 - i)) & 1u;  // MSB first within the field
    if (on) {
      words_[bit / 64] |= mask;
    } else {
      words_[bit / 64] &= ~mask;
    }
  }
}

std::string VertexEncoding::to_bit_string(const EncodingScheme& scheme) const {
  std::string out(scheme.total_bits(), '0');
  std::uint32_t label = label_value(scheme);
  for (std::uint32_t i = 0; i < scheme.label_bits; ++i) {
    out[i] = ((label >> (scheme.label_bits - 1 - i)) & 1u) ? '1' : '0';
  }
  for (std::size_t gi = 0; gi < scheme.query_labels.size(); ++gi) {
    std::uint32_t v = group_value(scheme, gi);
    std::uint32_t base = scheme.label_bits + static_cast<std::uint32_t>(gi) * scheme.group_bits;
    for (std::uint32_t i = 0; i < scheme.group_bits; ++i) {
      out[base + i] = ((v >> (scheme.group_bits - 1 - i)) & 1u) ? '1' : '0';
    }
  }
  return out;
}

VertexEncoding encode_vertex(const LabeledGraph& g, VertexId v, const EncodingScheme& scheme) {
  LabelId lab = g.label(v);
  if (lab >= (std::uint64_t{1} << scheme.label_bits)) {
    throw std::invalid_argument("vertex label " + std::to_string(lab) +
                                " exceeds the scheme's label field");
  }
  VertexEncoding enc(scheme);
  enc.set_label(scheme, lab);
  std::vector<std::uint32_t> counts(scheme.query_labels.size(), 0);
  g.for_each_neighbor(v, [&](VertexId w) {
    int gi = scheme.group_index(g.label(w));
    if (gi >= 0) ++counts[static_cast<std::size_t>(gi)];
  });
  for (std::size_t gi = 0; gi < counts.size(); ++gi) {
    enc.set_group(scheme, gi, std::min(counts[gi], scheme.group_cap()));
  }
  return enc;
}

std::vector<VertexEncoding> encode_all(const LabeledGraph& g, const EncodingScheme& scheme) {
  std::vector<VertexEncoding> out;
  out.reserve(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) out.push_back(encode_vertex(g, v, scheme));
  return out;
}

std::vector<VertexEncoding> encode_query(const QueryGraph& q, const EncodingScheme& scheme) {
  std::vector<VertexEncoding> out;
  out.reserve(q.vertex_count());
  for (QueryVertexId u = 0; u < q.vertex_count(); ++u) {
    VertexEncoding enc(scheme);
    enc.set_label(scheme, q.label(u));
    std::vector<std::uint32_t> counts(scheme.query_labels.size(), 0);
    for (QueryVertexId w : q.neighbors(u)) {
      int gi = scheme.group_index(q.label(w));
      if (gi >= 0) ++counts[static_cast<std::size_t>(gi)];
    }
    for (std::size_t gi = 0; gi < counts.size(); ++gi) {
      enc.set_group(scheme, gi, std::min(counts[gi], scheme.group_cap()));
    }
    out.push_back(enc);
  }
  return out;
}

bool encoding_contains(const VertexEncoding& query_enc, const VertexEncoding& data_enc,
                       const EncodingScheme& scheme) {
  if (query_enc.label_value(scheme) != data_enc.label_value(scheme)) return false;
  for (std::size_t gi = 0; gi < scheme.query_labels.size(); ++gi) {
    if (data_enc.group_value(scheme, gi) < query_enc.group_value(scheme, gi)) return false;
  }
  return true;
}

std::vector<VertexId> incremental_reencode(const LabeledGraph& g_after,
                                           const UpdateBatch& batch,
                                           const EncodingScheme& scheme,
                                           std::vector<VertexEncoding>& encodings) {
  std::unordered_set<VertexId> touched;
  for (const EdgeUpdate& up : batch.updates()) {
    touched.insert(up.u);
    touched.insert(up.v);
  }
  std::vector<VertexId> dirty;
  for (VertexId v : touched) {
    VertexEncoding fresh = encode_vertex(g_after, v, scheme);
    if (!(fresh == encodings[v])) {
      encodings[v] = std::move(fresh);
      dirty.push_back(v);
    }
  }
  std::sort(dirty.begin(), dirty.end());
  return dirty;
}

std::uint32_t CandidateTable::compute_row(const VertexEncoding& data_enc,
                                          const std::vector<VertexEncoding>& query_encodings,
                                          const EncodingScheme& scheme) {
  std::uint32_t row = 0;
  for (std::size_t u = 0; u < query_encodings.size(); ++u) {
    if (encoding_contains(query_encodings[u], data_enc, scheme)) row |= 1u << u;
  }
  return row;
}

CandidateTable CandidateTable::build(const std::vector<VertexEncoding>& data_encodings,
                                     const std::vector<VertexEncoding>& query_encodings,
                                     const EncodingScheme& scheme) {
  CandidateTable t;
  t.rows_.resize(data_encodings.size());
  t.columns_.assign(query_encodings.size(), {});
  for (VertexId v = 0; v < data_encodings.size(); ++v) {
    std::uint32_t row = compute_row(data_encodings[v], query_encodings, scheme);
    t.rows_[v] = row;
    for (std::size_t u = 0; u < query_encodings.size(); ++u) {
      if ((row >> u) & 1u) t.columns_[u].push_back(v);
    }
  }
  return t;
}

void CandidateTable::refresh(const std::vector<VertexId>& dirty,
                             const std::vector<VertexEncoding>& data_encodings,
                             const std::vector<VertexEncoding>& query_encodings,
                             const EncodingScheme& scheme) {
  for (VertexId v : dirty) {
    std::uint32_t before = rows_[v];
    std::uint32_t after = compute_row(data_encodings[v], query_encodings, scheme);
    if (before == after) continue;
    rows_[v] = after;
    std::uint32_t gained = after & ~before;
    std::uint32_t lost = before & ~after;
    for (std::size_t u = 0; u < columns_.size(); ++u) {
      auto& col = columns_[u];
      if ((gained >> u) & 1u) {
        col.insert(std::lower_bound(col.begin(), col.end(), v), v);
      } else if ((lost >> u) & 1u) {
        col.erase(std::lower_bound(col.begin(), col.end(), v));
      }
    }
  }
}

}  // namespace bdsm
