#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bdsm/graph.hpp"
#include "bdsm/query_graph.hpp"

namespace bdsm {

// Text graph format, one record per line, 0-based ids:
//   v <id> <label>
//   e <u> <v> [<edge-label>]
LabeledGraph load_graph(std::istream& in);
LabeledGraph load_graph_file(const std::string& path);
QueryGraph load_query(std::istream& in);
QueryGraph load_query_file(const std::string& path);
void save_query(std::ostream& out, const QueryGraph& q);

// Update stream format: blank-line-separated batches of
//   + <u> <v> [<edge-label>]
//   - <u> <v>
std::vector<UpdateBatch> load_stream(std::istream& in);
std::vector<UpdateBatch> load_stream_file(const std::string& path);
void save_stream(std::ostream& out, const std::vector<UpdateBatch>& stream);

}  // namespace bdsm
