#pragma once

#include <vector>

#include "bdsm/graph.hpp"
#include "bdsm/query_graph.hpp"
#include "bdsm/search.hpp"

namespace bdsm {
namespace oracle {

// Reference semantics for tests: plain backtracking over label-compatible
// vertices with no filtering beyond labels, against its own adjacency-set
// copy of the graph. Deliberately slow and obviously correct.
struct MatchSet {
  std::vector<Match> matches;  // canonically sorted
};

MatchSet enumerate_all_matches(const LabeledGraph& g, const QueryGraph& q);

struct IncrementalDiff {
  std::vector<Match> positive;
  std::vector<Match> negative;
};

// positive = matches(G') \ matches(G), negative = matches(G) \ matches(G'),
// with G' the naive replay of the batch over adjacency sets.
IncrementalDiff incremental_diff_oracle(const LabeledGraph& g, const UpdateBatch& batch,
                                        const QueryGraph& q);

}  // namespace oracle
}  // namespace bdsm
