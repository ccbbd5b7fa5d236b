#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bdsm/bench.hpp"
#include "bdsm/io.hpp"
#include "bdsm/matcher.hpp"
#include "bdsm/query_analysis.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch-dynamic subgraph matching engine"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run queries against an update stream");
  std::string graph_path;
  std::string query_path;
  std::string gen_queries_spec;
  std::string stream_path;
  std::string gen_stream_spec;
  std::string stealing = "off";
  std::string coalesce = "on";
  std::string out_dir = "out";
  std::string dump_plan_path;
  std::size_t workers = 1;
  std::size_t group_size = 4;
  double timeout = 1800.0;
  std::uint64_t seed = 1;
  std::uint32_t group_bits = 2;
  bool no_pipeline = false;
  bool dump_matches = false;

  run->add_option("--graph", graph_path, "data graph file (v/e records)")->required();
  run->add_option("--query", query_path, "query graph file");
  run->add_option("--gen-queries", gen_queries_spec, "generate queries: <cat,size,count>");
  run->add_option("--stream", stream_path, "update stream file");
  run->add_option("--gen-stream", gen_stream_spec,
                  "generate stream: <rate,mode,batches[,kcore]>");
  run->add_option("--workers", workers, "worker threads");
  run->add_option("--group-size", group_size, "workers per stealing group");
  run->add_option("--stealing", stealing, "off|passive|active");
  run->add_option("--coalesce", coalesce, "on|off");
  run->add_option("--timeout", timeout, "per-query time limit in seconds");
  run->add_option("--seed", seed, "random seed for generators");
  run->add_option("--out", out_dir, "output directory for CSV reports");
  run->add_option("--group-bits", group_bits, "bits per neighbor-label counter");
  run->add_option("--dump-plan", dump_plan_path, "write the first query's plan as JSON");
  run->add_flag("--no-pipeline", no_pipeline, "run stages sequentially");
  run->add_flag("--dump-matches", dump_matches, "write matches per batch to the out dir");

  CLI11_PARSE(app, argc, argv);

  try {
    bdsm::LabeledGraph g = bdsm::load_graph_file(graph_path);
    bdsm::log_info("graph: " + std::to_string(g.vertex_count()) + " vertices, " +
                   std::to_string(g.edge_count()) + " edges");

    std::vector<bdsm::QueryGraph> queries;
    std::vector<std::string> categories;
    if (!query_path.empty()) {
      queries.push_back(bdsm::load_query_file(query_path));
      categories.push_back("file");
    } else if (!gen_queries_spec.empty()) {
      auto parts = split_csv(gen_queries_spec);
      if (parts.size() != 3) throw std::runtime_error("--gen-queries wants <cat,size,count>");
      bdsm::QuerySpec spec;
      spec.category = bdsm::parse_query_category(parts[0]);
      spec.size = std::stoul(parts[1]);
      spec.count = std::stoul(parts[2]);
      queries = bdsm::generate_queries(g, spec, seed);
      categories.assign(queries.size(), parts[0]);
      std::filesystem::create_directories(out_dir);
      for (std::size_t i = 0; i < queries.size(); ++i) {
        std::ofstream qf(std::filesystem::path(out_dir) / ("query_" + std::to_string(i) + ".txt"));
        bdsm::save_query(qf, queries[i]);
      }
    } else {
      throw std::runtime_error("need --query or --gen-queries");
    }

    std::vector<bdsm::UpdateBatch> stream;
    if (!stream_path.empty()) {
      stream = bdsm::load_stream_file(stream_path);
    } else if (!gen_stream_spec.empty()) {
      auto parts = split_csv(gen_stream_spec);
      if (parts.size() < 3) throw std::runtime_error("--gen-stream wants <rate,mode,batches[,k]>");
      bdsm::StreamSpec spec;
      spec.rate = std::stod(parts[0]);
      spec.mode = bdsm::parse_stream_mode(parts[1]);
      spec.batches = std::stoul(parts[2]);
      if (parts.size() > 3) spec.kcore = static_cast<std::uint32_t>(std::stoul(parts[3]));
      spec.seed = seed;
      stream = bdsm::generate_stream(g, spec);
      std::filesystem::create_directories(out_dir);
      std::ofstream sf(std::filesystem::path(out_dir) / "stream.txt");
      bdsm::save_stream(sf, stream);
    } else {
      throw std::runtime_error("need --stream or --gen-stream");
    }
    bdsm::log_info("stream: " + std::to_string(stream.size()) + " batches");

    bdsm::PipelineConfig config;
    config.match.coalesce = coalesce == "on";
    config.match.scheduler.workers = workers;
    config.match.scheduler.group_size = group_size;
    config.match.scheduler.stealing = bdsm::parse_steal_mode(stealing);
    config.timeout_seconds = timeout;
    config.pipelined = !no_pipeline;
    config.group_bits = group_bits;
    config.query_categories = categories;
    if (dump_matches) {
      std::filesystem::create_directories(out_dir);
      config.dump_matches_dir = out_dir;
    }

    if (!dump_plan_path.empty() && !queries.empty()) {
      auto enc = bdsm::QueryEncodingState::initialize(g, queries[0], group_bits);
      auto plan = bdsm::build_query_plan(queries[0], enc.table,
                                         bdsm::PlanOptions{config.match.coalesce, {}});
      std::ofstream pf(dump_plan_path);
      pf << bdsm::plan_to_json(plan, queries[0]);
    }

    bdsm::RunReport report = bdsm::run_pipeline(g, queries, stream, config);
    bdsm::emit_report(report, out_dir);

    std::size_t pos = 0, neg = 0, unsolved = 0;
    for (const auto& d : report.deltas) {
      pos += d.positive;
      neg += d.negative;
    }
    for (const auto& q : report.queries) unsolved += q.solved ? 0 : 1;
    std::cout << "batches=" << report.deltas.size() << " positive=" << pos
              << " negative=" << neg << " unsolved_queries=" << unsolved
              << " reports=" << out_dir << "/\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
