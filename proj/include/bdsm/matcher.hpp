#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdsm/encoding.hpp"
#include "bdsm/graph.hpp"
#include "bdsm/query_analysis.hpp"
#include "bdsm/query_graph.hpp"
#include "bdsm/scheduler.hpp"
#include "bdsm/search.hpp"

namespace bdsm {

// Engine-side per-query state: the encoding scheme, both encoding sides and
// the candidate table, kept in lockstep with the data graph.
struct QueryEncodingState {
  EncodingScheme scheme;
  std::vector<VertexEncoding> data_encodings;
  std::vector<VertexEncoding> query_encodings;
  CandidateTable table;

  static QueryEncodingState initialize(const LabeledGraph& g, const QueryGraph& q,
                                       std::uint32_t group_bits = 2);
  // Incremental re-encode against the post-batch graph plus table refresh;
  // returns the dirty vertices.
  std::vector<VertexId> refresh(const LabeledGraph& g_after, const UpdateBatch& batch);
};

enum class MatchPhase { kNegative, kPositive };

struct AnchorTarget {
  std::size_t edge;
  bool flipped;  // anchor maps (v, u) instead of (u, v) onto the edge
};

// Same-kind batch updates keyed by unordered endpoint pair, for the
// lowest-order duplicate-elimination rule.
struct UpdateIndex {
  std::unordered_map<std::uint64_t, std::uint32_t> order_by_pair;

  static UpdateIndex build(const UpdateBatch& batch, bool inserts);
  std::optional<std::uint32_t> order_of(VertexId a, VertexId b) const;
};

struct MatchOptions {
  bool coalesce = true;
  SchedulerConfig scheduler;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct IncrementalMatchSet {
  std::vector<Match> positive;
  std::vector<Match> negative;
};

// Query edges whose endpoint labels (and edge label) fit the update in either
// orientation. Under coalescing, edges covered by a group are represented by
// the group's prioritized edge only.
std::vector<AnchorTarget> map_update_to_query_edges(const QueryGraph& q, LabelId label_u,
                                                    LabelId label_v,
                                                    std::optional<LabelId> edge_label,
                                                    const QueryPlan& plan, bool coalesce);

// Candidate list for order position `level`: the candidate column of the
// level's query vertex intersected with the neighbor lists of every assigned
// adjacent vertex (label-filtered for labeled query edges), minus data
// vertices already used.
std::vector<VertexId> gen_candidates(const LabeledGraph& g, const QueryGraph& q,
                                     const std::vector<VertexId>& assignment,
                                     const MatchingOrder& order, std::size_t level,
                                     const CandidateTable& table, MatchStats* stats = nullptr);

// Accept iff every same-kind updated edge contained in the match has order
// greater than the anchor's.
bool dedupe_by_order(const Match& m, const QueryGraph& q, std::uint32_t anchor_order,
                     const UpdateIndex& updates);

struct ExpandedPartials {
  bool identity_ok = false;
  std::vector<std::vector<VertexId>> variants;  // by order position
};

// Rearranges a retained-set partial into the group's covered-edge variants;
// every emitted variant (and the identity) must pass the per-position
// candidate-table check.
ExpandedPartials coalesced_expand(const std::vector<VertexId>& partial,
                                  const MatchingOrder& order, const CoalescedGroup& group,
                                  const QueryGraph& q, const CandidateTable& table);

struct PhaseResult {
  std::vector<Match> matches;  // canonically sorted, duplicate-free
  UtilizationReport utilization;
};

PhaseResult match_phase(const LabeledGraph& g, const QueryGraph& q, const QueryPlan& plan,
                        const CandidateTable& table, const UpdateBatch& batch,
                        MatchPhase phase, const MatchOptions& opts, MatchStats& stats);

// Full batch semantics: negative matches on the pre-batch graph and table,
// then the in-place graph update and incremental table refresh, then positive
// matches on the post-batch state.
IncrementalMatchSet match_batch(LabeledGraph& g, const QueryGraph& q, const QueryPlan& plan,
                                QueryEncodingState& enc, const UpdateBatch& batch,
                                const MatchOptions& opts, MatchStats* stats = nullptr);

std::string format_match(char sign, const Match& m);
bool validate_match(const LabeledGraph& g, const QueryGraph& q, const Match& m);

}  // namespace bdsm
