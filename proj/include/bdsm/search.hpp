#pragma once

#include <cstdint>
#include <vector>

#include "bdsm/graph.hpp"
#include "bdsm/types.hpp"

namespace bdsm {

// A full match: data vertex per query vertex, indexed by query vertex id.
struct Match {
  std::vector<VertexId> image;
  bool operator==(const Match&) const = default;
  bool operator<(const Match& o) const { return image < o.image; }
};

struct MatchStats {
  std::uint64_t dfs_visits = 0;         // candidate explorations at DFS/join levels
  std::uint64_t intersection_ops = 0;
  std::uint64_t tasks_run = 0;
  std::uint64_t active_steals = 0;
  std::uint64_t passive_handoffs = 0;
  std::uint64_t matches_emitted = 0;
  bool timed_out = false;

  void merge(const MatchStats& o) {
    dfs_visits += o.dfs_visits;
    intersection_ops += o.intersection_ops;
    tasks_run += o.tasks_run;
    active_steals += o.active_steals;
    passive_handoffs += o.passive_handoffs;
    matches_emitted += o.matches_emitted;
    timed_out = timed_out || o.timed_out;
  }
};

// Per-level DFS bookkeeping published for work stealing: `cursor` is the next
// unexplored index and `limit` the end of this worker's share (it shrinks
// when a thief claims the upper half).
struct SearchLevel {
  std::vector<VertexId> candidates;
  std::uint32_t cursor = 0;
  std::uint32_t limit = 0;

  std::uint32_t unexplored() const { return limit > cursor ? limit - cursor : 0; }
};

struct SearchState {
  std::vector<VertexId> assignment;  // by matching-order position
  std::vector<SearchLevel> levels;
  std::uint32_t level = 0;           // current DFS level
  std::uint32_t start_level = 0;     // prefix below this is fixed
};

// One unit of matcher work: a fresh (update, query edge, orientation) anchor,
// a coalesced-expansion continuation, or a stolen candidate range.
struct MatchTask {
  std::size_t edge = 0;  // target query edge
  EdgeUpdate anchor;
  bool flipped = false;

  std::vector<VertexId> prefix;             // assignment[0..start_level)
  std::uint32_t start_level = 2;
  std::vector<VertexId> seeded_candidates;  // preset C[start_level] when stolen
  std::uint32_t boundary = kNoBoundary;     // coalesced-group boundary, if any
  bool past_boundary = false;

  static constexpr std::uint32_t kNoBoundary = 0xffffffffu;
};

}  // namespace bdsm
