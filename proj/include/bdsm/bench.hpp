#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bdsm/graph.hpp"
#include "bdsm/matcher.hpp"
#include "bdsm/query_graph.hpp"
#include "bdsm/scheduler.hpp"

namespace bdsm {

enum class QueryCategory { kDense, kSparse, kTree };

QueryCategory parse_query_category(const std::string& s);
std::string to_string(QueryCategory c);

struct QuerySpec {
  QueryCategory category = QueryCategory::kSparse;
  std::size_t size = 6;    // |V(Q)|
  std::size_t count = 50;  // queries per set
};

enum class StreamMode { kInsert, kDelete, kMixed };

StreamMode parse_stream_mode(const std::string& s);

struct StreamSpec {
  double rate = 0.10;  // fraction of |E|
  StreamMode mode = StreamMode::kInsert;
  std::size_t batches = 1;
  std::optional<std::uint32_t> kcore;  // density mode: sample within the k-core
  std::uint64_t seed = 1;
};

// Connected subgraphs extracted by random walk with per-category rejection;
// labels are inherited from the data graph.
std::vector<QueryGraph> generate_queries(const LabeledGraph& g, const QuerySpec& spec,
                                         std::uint64_t seed);

// Valid against the evolving graph: deletions hit edges existing at their
// batch's pre-state, insertions hit non-edges whose endpoint-label pair
// occurs in the graph. Mixed mode interleaves insertions and deletions 2:1.
std::vector<UpdateBatch> generate_stream(const LabeledGraph& g, const StreamSpec& spec);

std::vector<std::uint32_t> core_numbers(const LabeledGraph& g);

struct QueryRun {
  std::size_t query_id;
  std::string category;
  std::size_t size;
  double seconds;
  bool solved;
};

struct BatchDelta {
  std::size_t batch;
  std::size_t positive;
  std::size_t negative;
};

struct StageTiming {
  std::size_t batch;
  double preprocess_s;  // encoding/table deltas plus the graph update
  double match_s;
  double ratio;  // preprocess share of the batch total
};

struct RunReport {
  std::vector<QueryRun> queries;
  std::vector<BatchDelta> deltas;     // summed over live queries per batch
  std::vector<StageTiming> stages;
  UtilizationReport utilization;      // busy time aggregated over all batches
  std::vector<IncrementalMatchSet> last_query_results;  // per batch, for tests
};

struct PipelineConfig {
  MatchOptions match;
  double timeout_seconds = 1800;  // per query; first timeout marks it unsolved
  bool pipelined = true;          // preprocess batch i+1 while matching batch i
  std::uint32_t group_bits = 2;
  double order_rebuild_threshold = 0.25;  // candidate-column drift triggering reorder
  std::string dump_matches_dir;           // empty: no dump
  std::vector<std::string> query_categories;  // for latency.csv, parallel to queries
};

// Runs every query against the update stream over one evolving graph.
RunReport run_pipeline(const LabeledGraph& g, const std::vector<QueryGraph>& queries,
                       const std::vector<UpdateBatch>& stream, const PipelineConfig& config);

void emit_report(const RunReport& report, const std::string& out_dir);

int log_level();  // BDSM_LOG: 0 off (default), 1 info, 2 debug
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace bdsm
