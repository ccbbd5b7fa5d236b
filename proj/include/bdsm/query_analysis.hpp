#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdsm/encoding.hpp"
#include "bdsm/query_graph.hpp"
#include "bdsm/types.hpp"

namespace bdsm {

// Permutation of V(Q) anchored at a query edge; every prefix induces a
// connected subgraph so candidate generation always has a constraining
// intersection.
struct MatchingOrder {
  std::size_t anchor_edge;                // index into QueryGraph::edges()
  std::vector<QueryVertexId> order;       // order[0], order[1] = anchor endpoints

  std::vector<std::uint32_t> position;    // query vertex -> position in order
};

// A vertex-to-vertex mapping over the query (identity outside the subgraph's
// retained set).
using VertexMapping = std::vector<QueryVertexId>;

struct DegeneratedAutomorphicSubgraph {
  std::uint32_t k = 0;                       // removed-vertex count
  std::vector<QueryVertexId> retained;       // V^k
  std::vector<QueryVertexId> removed;        // R^k
  std::vector<std::size_t> equivalent_edges; // E^k, indices into Q's edges
  std::vector<VertexMapping> mappings;       // M^k, non-identity automorphisms
  std::size_t prioritized_edge = 0;          // member of E^k
};

std::vector<VertexMapping> enumerate_automorphisms(const QueryGraph& q);
std::vector<VertexMapping> enumerate_automorphisms(
    const QueryGraph& q, const std::vector<QueryVertexId>& retained,
    std::size_t limit = 0, bool* truncated = nullptr);

struct KDegenOptions {
  int max_k = -1;              // default |V(Q)| - 3
  std::size_t automorphism_limit = 20000;  // guard for uniform-label near-cliques
};

std::vector<DegeneratedAutomorphicSubgraph> find_k_degenerated_subgraphs(
    const QueryGraph& q, const KDegenOptions& opts = {});

// Rule 1: an edge shared across different k stays with the smaller k.
// Rule 2: within equal k it stays with the larger equivalent set (ties by
// entry index). Sets that shrink below two edges are dropped.
std::vector<DegeneratedAutomorphicSubgraph> resolve_overlaps(
    std::vector<DegeneratedAutomorphicSubgraph> entries);

std::size_t select_prioritized_edge(const DegeneratedAutomorphicSubgraph& entry,
                                    const QueryGraph& q);

MatchingOrder generate_matching_order(const QueryGraph& q, std::size_t anchor_edge,
                                      const CandidateTable& table);

// Matcher-facing view of one coalesced group: matches are searched only from
// the prioritized edge; one stored mapping per covered edge rearranges a
// partial match over the retained set into that edge's partial match.
struct CoalescedGroup {
  std::size_t entry_index;                  // into QueryPlan::entries
  std::size_t prioritized_edge;
  std::vector<std::size_t> covered_edges;   // excluding the prioritized edge
  std::vector<VertexMapping> expansions;    // aligned with covered_edges
  std::uint32_t retained_mask = 0;
  std::vector<QueryVertexId> join_tail;     // degree-1 removed vertices, joined late
};

struct EdgePlan {
  std::optional<MatchingOrder> order;  // absent for suppressed edges
  int group = -1;                      // CoalescedGroup index when prioritized
  bool suppressed = false;             // covered by another edge's group
};

struct QueryPlan {
  std::vector<DegeneratedAutomorphicSubgraph> entries;
  std::vector<CoalescedGroup> groups;
  std::vector<EdgePlan> edge_plans;          // one per query edge
  std::vector<std::size_t> column_sizes;     // candidate column sizes at build time
  bool coalescing = true;
};

struct PlanOptions {
  bool coalesce = true;
  KDegenOptions kdegen;
};

QueryPlan build_query_plan(const QueryGraph& q, const CandidateTable& table,
                           const PlanOptions& opts = {});

// Candidate-column drift since the plan was built, as a fraction of the total
// column mass; orders are regenerated when this passes the rebuild threshold.
double plan_column_drift(const QueryPlan& plan, const CandidateTable& table);

std::string plan_to_json(const QueryPlan& plan, const QueryGraph& q);

}  // namespace bdsm
