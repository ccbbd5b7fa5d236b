#include "bdsm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "bdsm/matcher.hpp"
#include "bdsm/query_analysis.hpp"

namespace bdsm {

QueryCategory parse_query_category(const std::string& s) {
  if (s == "dense") return QueryCategory::kDense;
  if (s == "sparse") return QueryCategory::kSparse;
  if (s == "tree") return QueryCategory::kTree;
  throw std::invalid_argument("unknown query category: " + s);
}

std::string to_string(QueryCategory c) {
  switch (c) {
    case QueryCategory::kDense: return "dense";
    case QueryCategory::kSparse: return "sparse";
    case QueryCategory::kTree: return "tree";
  }
  return "sparse";
}

StreamMode parse_stream_mode(const std::string& s) {
  if (s == "insert") return StreamMode::kInsert;
  if (s == "delete") return StreamMode::kDelete;
  if (s == "mixed") return StreamMode::kMixed;
  throw std::invalid_argument("unknown stream mode: " + s);
}

int log_level() {
  static int level = [] {
    const char* env = std::getenv("BDSM_LOG");
    if (env == nullptr) return 0;
    std::string s(env);
    if (s == "info" || s == "1") return 1;
    if (s == "debug" || s == "2") return 2;
    return 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[bdsm] " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[bdsm:debug] " << msg << '\n';
}

std::vector<QueryGraph> generate_queries(const LabeledGraph& g, const QuerySpec& spec,
                                         std::uint64_t seed) {
  if (spec.size < 2 || spec.size > 32) throw std::invalid_argument("query size out of range");
  if (spec.size > g.vertex_count()) throw std::invalid_argument("query larger than graph");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick_vertex(0, static_cast<VertexId>(g.vertex_count() - 1));

  std::vector<QueryGraph> out;
  for (std::size_t qi = 0; qi < spec.count; ++qi) {
    bool made = false;
    for (std::size_t attempt = 0; attempt < 4000 && !made; ++attempt) {
      VertexId start = pick_vertex(rng);
      if (g.degree(start) == 0) continue;
      std::vector<VertexId> members{start};
      std::unordered_set<VertexId> member_set{start};
      std::vector<std::pair<VertexId, VertexId>> tree_edges;
      std::size_t stuck = 0;
      while (members.size() < spec.size && stuck < 64 * spec.size) {
        VertexId u = members[rng() % members.size()];
        std::vector<VertexId> nbrs = g.neighbors(u);
        if (nbrs.empty()) {
          ++stuck;
          continue;
        }
        VertexId w = nbrs[rng() % nbrs.size()];
        if (member_set.count(w)) {
          ++stuck;
          continue;
        }
        members.push_back(w);
        member_set.insert(w);
        tree_edges.emplace_back(u, w);
        stuck = 0;
      }
      if (members.size() < spec.size) continue;

      std::sort(members.begin(), members.end());
      std::unordered_map<VertexId, QueryVertexId> local;
      std::vector<LabelId> labels(members.size());
      for (std::size_t i = 0; i < members.size(); ++i) {
        local[members[i]] = static_cast<QueryVertexId>(i);
        labels[i] = g.label(members[i]);
      }

      std::vector<QueryEdge> edges;
      if (spec.category == QueryCategory::kTree) {
        for (auto& [u, w] : tree_edges) {
          edges.push_back({local[u], local[w], g.edge_label(u, w)});
        }
      } else {
        for (VertexId u : members) {
          for (VertexId w : g.neighbors(u)) {
            if (w > u && member_set.count(w)) {
              edges.push_back({local[u], local[w], g.edge_label(u, w)});
            }
          }
        }
        double d_avg = 2.0 * static_cast<double>(edges.size()) / static_cast<double>(spec.size);
        if (spec.category == QueryCategory::kDense && d_avg < 3.0) continue;
        if (spec.category == QueryCategory::kSparse &&
            (d_avg >= 3.0 || edges.size() < spec.size)) {
          continue;  // sparse keeps a cycle so the category stays apart from trees
        }
      }
      out.emplace_back(std::move(labels), std::move(edges));
      made = true;
    }
    if (!made) {
      throw std::runtime_error("could not extract a " + to_string(spec.category) +
                               " query of size " + std::to_string(spec.size));
    }
  }
  return out;
}

std::vector<std::uint32_t> core_numbers(const LabeledGraph& g) {
  std::size_t n = g.vertex_count();
  std::vector<std::uint32_t> deg(n), core(n, 0);
  std::size_t max_deg = 0;
  for (VertexId v = 0; v < n; ++v) {
    deg[v] = static_cast<std::uint32_t>(g.degree(v));
    max_deg = std::max<std::size_t>(max_deg, deg[v]);
  }
  // Batagelj-Zaversnik peeling with bucketed vertices.
  std::vector<std::vector<VertexId>> buckets(max_deg + 1);
  for (VertexId v = 0; v < n; ++v) buckets[deg[v]].push_back(v);
  std::vector<bool> done(n, false);
  std::size_t processed = 0;
  std::uint32_t current = 0;
  std::size_t bucket_idx = 0;
  while (processed < n) {
    while (bucket_idx <= max_deg && buckets[bucket_idx].empty()) ++bucket_idx;
    if (bucket_idx > max_deg) break;
    VertexId v = buckets[bucket_idx].back();
    buckets[bucket_idx].pop_back();
    if (done[v] || deg[v] != bucket_idx) continue;  // stale bucket entry
    done[v] = true;
    ++processed;
    current = std::max(current, static_cast<std::uint32_t>(bucket_idx));
    core[v] = current;
    g.for_each_neighbor(v, [&](VertexId w) {
      if (done[w] || deg[w] == 0) return;
      if (deg[w] > deg[v]) {
        --deg[w];
        buckets[deg[w]].push_back(w);
        if (deg[w] < bucket_idx) bucket_idx = deg[w];
      }
    });
  }
  return core;
}

std::vector<UpdateBatch> generate_stream(const LabeledGraph& g, const StreamSpec& spec) {
  if (spec.rate <= 0.0 || spec.rate > 1.0) throw std::invalid_argument("rate must be in (0,1]");
  if (spec.batches == 0) throw std::invalid_argument("batches must be >= 1");
  std::mt19937_64 rng(spec.seed);

  // Evolving replica for validity of every sampled update.
  std::size_t n = g.vertex_count();
  std::vector<std::unordered_set<VertexId>> adj(n);
  std::vector<std::pair<VertexId, VertexId>> edge_list;
  std::unordered_map<std::uint64_t, std::vector<LabelId>> labels_by_pair;
  std::set<std::uint64_t> label_pairs;
  for (VertexId v = 0; v < n; ++v) {
    for (VertexId w : g.neighbors(v)) {
      adj[v].insert(w);
      if (v < w) {
        edge_list.emplace_back(v, w);
        std::uint64_t lp = edge_pair_key(g.label(v), g.label(w));
        label_pairs.insert(lp);
        if (auto el = g.edge_label(v, w)) labels_by_pair[lp].push_back(*el);
      }
    }
  }

  std::vector<bool> in_core(n, true);
  if (spec.kcore) {
    auto cores = core_numbers(g);
    std::size_t kept = 0;
    for (VertexId v = 0; v < n; ++v) {
      in_core[v] = cores[v] >= *spec.kcore;
      kept += in_core[v];
    }
    if (kept < 2) throw std::runtime_error("k-core too small for density mode");
  }

  auto total = static_cast<std::size_t>(std::llround(spec.rate * static_cast<double>(edge_list.size())));
  total = std::max<std::size_t>(total, 1);
  if (total == 1) {
    log_info("stream has a single update; batch-dynamic semantics expect |dB| > 1");
  }

  std::uniform_int_distribution<VertexId> pick_vertex(0, static_cast<VertexId>(n - 1));
  std::vector<UpdateBatch> stream;
  std::size_t emitted = 0;
  for (std::size_t bi = 0; bi < spec.batches; ++bi) {
    std::size_t want = total / spec.batches + (bi < total % spec.batches ? 1 : 0);
    if (want == 0) continue;
    std::vector<EdgeUpdate> updates;
    std::unordered_set<std::uint64_t> batch_pairs;
    for (std::size_t s = 0; s < want; ++s, ++emitted) {
      bool insert = spec.mode == StreamMode::kInsert ||
                    (spec.mode == StreamMode::kMixed && emitted % 3 != 2);
      if (spec.mode == StreamMode::kDelete) insert = false;
      if (insert) {
        bool found = false;
        for (std::size_t attempt = 0; attempt < 20000 && !found; ++attempt) {
          VertexId u = pick_vertex(rng);
          VertexId v = pick_vertex(rng);
          if (u == v || !in_core[u] || !in_core[v]) continue;
          if (adj[u].count(v)) continue;
          std::uint64_t pk = edge_pair_key(u, v);
          if (batch_pairs.count(pk)) continue;
          std::uint64_t lp = edge_pair_key(g.label(u), g.label(v));
          if (!label_pairs.count(lp)) continue;
          std::optional<LabelId> el;
          auto it = labels_by_pair.find(lp);
          if (it != labels_by_pair.end() && !it->second.empty()) {
            el = it->second[rng() % it->second.size()];
          }
          updates.push_back({EdgeUpdate::Op::kInsert, u, v, el, 0});
          batch_pairs.insert(pk);
          found = true;
        }
        if (!found) throw std::runtime_error("insufficient label-compatible non-edges");
      } else {
        bool found = false;
        for (std::size_t attempt = 0; attempt < 20000 && !found; ++attempt) {
          if (edge_list.empty()) break;
          std::size_t idx = rng() % edge_list.size();
          auto [u, v] = edge_list[idx];
          if (!in_core[u] || !in_core[v]) continue;
          std::uint64_t pk = edge_pair_key(u, v);
          if (batch_pairs.count(pk)) continue;
          updates.push_back({EdgeUpdate::Op::kDelete, u, v, std::nullopt, 0});
          batch_pairs.insert(pk);
          found = true;
        }
        if (!found) throw std::runtime_error("no deletable edges left");
      }
    }
    UpdateBatch batch(std::move(updates));
    // Advance the replica so the next batch samples against the post-state.
    for (const EdgeUpdate& up : batch.updates()) {
      if (up.is_insert()) {
        adj[up.u].insert(up.v);
        adj[up.v].insert(up.u);
        edge_list.emplace_back(std::min(up.u, up.v), std::max(up.u, up.v));
      } else {
        adj[up.u].erase(up.v);
        adj[up.v].erase(up.u);
        auto it = std::find(edge_list.begin(), edge_list.end(),
                            std::make_pair(std::min(up.u, up.v), std::max(up.u, up.v)));
        if (it != edge_list.end()) {
          *it = edge_list.back();
          edge_list.pop_back();
        }
      }
    }
    stream.push_back(std::move(batch));
  }
  return stream;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct QueryState {
  const QueryGraph* q = nullptr;
  QueryEncodingState enc;
  QueryPlan plan;
  double spent_seconds = 0;
  bool solved = true;
};

struct QueryDelta {
  std::vector<std::pair<VertexId, VertexEncoding>> dirty;
};

struct PreprocessedBatch {
  std::size_t index = 0;
  const UpdateBatch* batch = nullptr;
  std::vector<QueryDelta> deltas;  // per query
  double seconds = 0;
};

struct MatchedBatch {
  std::size_t index = 0;
  std::vector<IncrementalMatchSet> results;  // per query (empty for dead queries)
  double preprocess_s = 0;
  double match_s = 0;
};

// Single-producer single-consumer handoff between pipeline stages.
template <typename T>
class StageQueue {
 public:
  explicit StageQueue(std::size_t cap) : cap_(cap) {}
  void push(T item) {
    std::unique_lock<std::mutex> lk(m_);
    cv_.wait(lk, [&] { return buf_.size() < cap_; });
    buf_.push_back(std::move(item));
    cv_.notify_all();
  }
  bool pop(T& out) {
    std::unique_lock<std::mutex> lk(m_);
    cv_.wait(lk, [&] { return !buf_.empty() || closed_; });
    if (buf_.empty()) return false;
    out = std::move(buf_.front());
    buf_.pop_front();
    cv_.notify_all();
    return true;
  }
  void close() {
    std::lock_guard<std::mutex> lk(m_);
    closed_ = true;
    cv_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::deque<T> buf_;
  std::size_t cap_;
  bool closed_ = false;
};

void accumulate_utilization(std::vector<WorkerUsage>& acc, const UtilizationReport& rep) {
  for (const WorkerUsage& w : rep.workers) {
    if (acc.size() <= w.worker) acc.resize(w.worker + 1, {0, 0, 0, 0});
    acc[w.worker].worker = w.worker;
    acc[w.worker].busy_seconds += w.busy_seconds;
    acc[w.worker].total_seconds += w.total_seconds;
  }
}

}  // namespace

RunReport run_pipeline(const LabeledGraph& g, const std::vector<QueryGraph>& queries,
                       const std::vector<UpdateBatch>& stream, const PipelineConfig& config) {
  RunReport report;
  LabeledGraph live = g;

  std::vector<QueryState> states(queries.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    QueryState& st = states[qi];
    st.q = &queries[qi];
    Clock::time_point t0 = Clock::now();
    st.enc = QueryEncodingState::initialize(live, queries[qi], config.group_bits);
    st.plan = build_query_plan(queries[qi], st.enc.table, PlanOptions{config.match.coalesce, {}});
    st.spent_seconds = seconds_since(t0);
    if (st.spent_seconds > config.timeout_seconds) st.solved = false;
  }

  // Preprocess stage: advances its own graph replica and per-query encoding
  // replicas, emitting per-batch encoding deltas for the match stage.
  auto preprocess_batch = [&](LabeledGraph& replica,
                              std::vector<std::vector<VertexEncoding>>& replica_enc,
                              std::size_t bi) {
    PreprocessedBatch pre;
    pre.index = bi;
    pre.batch = &stream[bi];
    Clock::time_point t0 = Clock::now();
    replica.apply_batch(stream[bi]);
    pre.deltas.resize(queries.size());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      std::vector<VertexId> dirty =
          incremental_reencode(replica, stream[bi], states[qi].enc.scheme, replica_enc[qi]);
      for (VertexId v : dirty) pre.deltas[qi].dirty.emplace_back(v, replica_enc[qi][v]);
    }
    pre.seconds = seconds_since(t0);
    return pre;
  };

  std::vector<WorkerUsage> util_acc;

  auto match_batch_stage = [&](const PreprocessedBatch& pre) {
    MatchedBatch matched;
    matched.index = pre.index;
    matched.preprocess_s = pre.seconds;
    matched.results.resize(queries.size());
    Clock::time_point mt0 = Clock::now();

    // Negative matches run against the pre-batch graph and tables.
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      QueryState& st = states[qi];
      if (!st.solved) continue;
      Clock::time_point t0 = Clock::now();
      MatchOptions opts = config.match;
      opts.deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(
                                   std::max(0.0, config.timeout_seconds - st.spent_seconds)));
      MatchStats stats;
      PhaseResult neg = match_phase(live, *st.q, st.plan, st.enc.table, *pre.batch,
                                    MatchPhase::kNegative, opts, stats);
      accumulate_utilization(util_acc, neg.utilization);
      st.spent_seconds += seconds_since(t0);
      if (stats.timed_out || st.spent_seconds > config.timeout_seconds) {
        st.solved = false;
        continue;
      }
      matched.results[qi].negative = std::move(neg.matches);
    }

    Clock::time_point ut0 = Clock::now();
    live.apply_batch(*pre.batch);
    matched.preprocess_s += seconds_since(ut0);

    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      QueryState& st = states[qi];
      if (!st.solved) continue;
      Clock::time_point t0 = Clock::now();
      std::vector<VertexId> dirty;
      dirty.reserve(pre.deltas[qi].dirty.size());
      for (const auto& [v, enc] : pre.deltas[qi].dirty) {
        st.enc.data_encodings[v] = enc;
        dirty.push_back(v);
      }
      st.enc.table.refresh(dirty, st.enc.data_encodings, st.enc.query_encodings, st.enc.scheme);
      if (plan_column_drift(st.plan, st.enc.table) > config.order_rebuild_threshold) {
        st.plan = build_query_plan(*st.q, st.enc.table, PlanOptions{config.match.coalesce, {}});
      }
      MatchOptions opts = config.match;
      opts.deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(
                                   std::max(0.0, config.timeout_seconds - st.spent_seconds)));
      MatchStats stats;
      PhaseResult pos = match_phase(live, *st.q, st.plan, st.enc.table, *pre.batch,
                                    MatchPhase::kPositive, opts, stats);
      accumulate_utilization(util_acc, pos.utilization);
      st.spent_seconds += seconds_since(t0);
      if (stats.timed_out || st.spent_seconds > config.timeout_seconds) {
        st.solved = false;
        matched.results[qi] = {};
        continue;
      }
      matched.results[qi].positive = std::move(pos.matches);
    }
    matched.match_s = seconds_since(mt0) - (matched.preprocess_s - pre.seconds);
    return matched;
  };

  auto postprocess = [&](MatchedBatch matched) {
    BatchDelta delta{matched.index, 0, 0};
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      delta.positive += matched.results[qi].positive.size();
      delta.negative += matched.results[qi].negative.size();
    }
    report.deltas.push_back(delta);
    double total = matched.preprocess_s + matched.match_s;
    report.stages.push_back({matched.index, matched.preprocess_s, matched.match_s,
                             total > 0 ? matched.preprocess_s / total : 0.0});
    if (!config.dump_matches_dir.empty()) {
      std::ofstream out(std::filesystem::path(config.dump_matches_dir) /
                        ("matches_batch" + std::to_string(matched.index) + ".txt"));
      for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        for (const Match& m : matched.results[qi].positive) out << format_match('+', m) << '\n';
        for (const Match& m : matched.results[qi].negative) out << format_match('-', m) << '\n';
      }
    }
    if (queries.size() == 1) report.last_query_results.push_back(std::move(matched.results[0]));
  };

  if (config.pipelined && stream.size() > 1) {
    StageQueue<PreprocessedBatch> pre_q(2);
    StageQueue<MatchedBatch> post_q(2);
    std::exception_ptr pre_error;

    std::thread pre_thread([&] {
      try {
        LabeledGraph replica = g;
        std::vector<std::vector<VertexEncoding>> replica_enc(queries.size());
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
          replica_enc[qi] = states[qi].enc.data_encodings;
        }
        for (std::size_t bi = 0; bi < stream.size(); ++bi) {
          pre_q.push(preprocess_batch(replica, replica_enc, bi));
        }
      } catch (...) {
        pre_error = std::current_exception();
      }
      pre_q.close();
    });

    std::thread post_thread([&] {
      MatchedBatch matched;
      while (post_q.pop(matched)) postprocess(std::move(matched));
    });

    PreprocessedBatch pre;
    std::exception_ptr match_error;
    while (pre_q.pop(pre)) {
      if (match_error) continue;  // drain so the producer can finish
      try {
        post_q.push(match_batch_stage(pre));
      } catch (...) {
        match_error = std::current_exception();
      }
    }
    post_q.close();
    pre_thread.join();
    post_thread.join();
    if (pre_error) std::rethrow_exception(pre_error);
    if (match_error) std::rethrow_exception(match_error);
  } else {
    LabeledGraph replica = g;
    std::vector<std::vector<VertexEncoding>> replica_enc(queries.size());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      replica_enc[qi] = states[qi].enc.data_encodings;
    }
    for (std::size_t bi = 0; bi < stream.size(); ++bi) {
      postprocess(match_batch_stage(preprocess_batch(replica, replica_enc, bi)));
    }
  }

  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    std::string category =
        qi < config.query_categories.size() ? config.query_categories[qi] : "query";
    report.queries.push_back({qi, category, states[qi].q->vertex_count(),
                              states[qi].spent_seconds, states[qi].solved});
  }
  report.utilization.workers = util_acc;
  double frac_sum = 0;
  for (auto& w : report.utilization.workers) {
    w.fraction = w.total_seconds > 0 ? w.busy_seconds / w.total_seconds : 0.0;
    frac_sum += w.fraction;
  }
  report.utilization.aggregate =
      report.utilization.workers.empty()
          ? 0.0
          : frac_sum / static_cast<double>(report.utilization.workers.size());
  return report;
}

void emit_report(const RunReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto path = [&](const char* name) { return std::filesystem::path(out_dir) / name; };

  std::ofstream latency(path("latency.csv"));
  latency << "query_id,category,size,seconds,solved\n";
  for (const QueryRun& q : report.queries) {
    latency << q.query_id << ',' << q.category << ',' << q.size << ',' << q.seconds << ','
            << (q.solved ? 1 : 0) << '\n';
  }

  std::ofstream deltas(path("deltas.csv"));
  deltas << "batch,positive,negative\n";
  for (const BatchDelta& d : report.deltas) {
    deltas << d.batch << ',' << d.positive << ',' << d.negative << '\n';
  }

  std::ofstream stages(path("stages.csv"));
  stages << "batch,preprocess_s,match_s,ratio\n";
  for (const StageTiming& s : report.stages) {
    stages << s.batch << ',' << s.preprocess_s << ',' << s.match_s << ',' << s.ratio << '\n';
  }

  std::ofstream util(path("utilization.csv"));
  util << report.utilization.to_csv();
}

}  // namespace bdsm
