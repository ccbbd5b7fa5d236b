#include "bdsm/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bdsm {

namespace {

struct ParsedGraph {
  std::vector<VertexRecord> vertices;
  std::vector<EdgeRecord> edges;
};

ParsedGraph parse_graph_records(std::istream& in) {
  ParsedGraph out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      VertexId id;
      LabelId label;
      if (!(ls >> id >> label)) {
        throw std::runtime_error("bad vertex record at line " + std::to_string(lineno));
      }
      out.vertices.push_back({id, label});
    } else if (tag == "e") {
      VertexId u, v;
      if (!(ls >> u >> v)) {
        throw std::runtime_error("bad edge record at line " + std::to_string(lineno));
      }
      EdgeRecord rec{u, v, std::nullopt};
      LabelId el;
      if (ls >> el) rec.label = el;
      out.edges.push_back(rec);
    } else {
      throw std::runtime_error("unknown record '" + tag + "' at line " + std::to_string(lineno));
    }
  }
  return out;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

LabeledGraph load_graph(std::istream& in) {
  ParsedGraph p = parse_graph_records(in);
  return LabeledGraph::build_from_edges(p.vertices, p.edges);
}

LabeledGraph load_graph_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_graph(in);
}

QueryGraph load_query(std::istream& in) {
  ParsedGraph p = parse_graph_records(in);
  std::vector<LabelId> labels(p.vertices.size(), kNoLabel);
  for (const VertexRecord& rec : p.vertices) {
    if (rec.id >= labels.size()) throw std::runtime_error("query vertex ids must be dense");
    labels[rec.id] = rec.label;
  }
  std::vector<QueryEdge> edges;
  edges.reserve(p.edges.size());
  for (const EdgeRecord& e : p.edges) {
    edges.push_back({static_cast<QueryVertexId>(e.u), static_cast<QueryVertexId>(e.v), e.label});
  }
  return QueryGraph(std::move(labels), std::move(edges));
}

QueryGraph load_query_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_query(in);
}

void save_query(std::ostream& out, const QueryGraph& q) {
  for (QueryVertexId u = 0; u < q.vertex_count(); ++u) {
    out << "v " << u << ' ' << q.label(u) << '\n';
  }
  for (const QueryEdge& e : q.edges()) {
    out << "e " << e.a << ' ' << e.b;
    if (e.label) out << ' ' << *e.label;
    out << '\n';
  }
}

std::vector<UpdateBatch> load_stream(std::istream& in) {
  std::vector<UpdateBatch> batches;
  std::vector<EdgeUpdate> current;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&]() {
    if (!current.empty()) {
      batches.emplace_back(std::move(current));
      current.clear();
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) {
      flush();
      continue;
    }
    if (tag[0] == '#') continue;
    if (tag != "+" && tag != "-") {
      throw std::runtime_error("bad update at line " + std::to_string(lineno));
    }
    VertexId u, v;
    if (!(ls >> u >> v)) {
      throw std::runtime_error("bad update at line " + std::to_string(lineno));
    }
    EdgeUpdate up{tag == "+" ? EdgeUpdate::Op::kInsert : EdgeUpdate::Op::kDelete, u, v,
                  std::nullopt, 0};
    LabelId el;
    if (tag == "+" && (ls >> el)) up.edge_label = el;
    current.push_back(up);
  }
  flush();
  return batches;
}

std::vector<UpdateBatch> load_stream_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_stream(in);
}

void save_stream(std::ostream& out, const std::vector<UpdateBatch>& stream) {
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (i > 0) out << '\n';
    for (const EdgeUpdate& up : stream[i].updates()) {
      out << (up.is_insert() ? '+' : '-') << ' ' << up.u << ' ' << up.v;
      if (up.is_insert() && up.edge_label) out << ' ' << *up.edge_label;
      out << '\n';
    }
  }
}

}  // namespace bdsm
