#include "bdsm/matcher.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <sstream>

namespace bdsm {

QueryEncodingState QueryEncodingState::initialize(const LabeledGraph& g, const QueryGraph& q,
                                                  std::uint32_t group_bits) {
  QueryEncodingState st;
  st.scheme = build_scheme(q, g.max_label(), group_bits);
  st.data_encodings = encode_all(g, st.scheme);
  st.query_encodings = encode_query(q, st.scheme);
  st.table = CandidateTable::build(st.data_encodings, st.query_encodings, st.scheme);
  return st;
}

std::vector<VertexId> QueryEncodingState::refresh(const LabeledGraph& g_after,
                                                  const UpdateBatch& batch) {
  std::vector<VertexId> dirty = incremental_reencode(g_after, batch, scheme, data_encodings);
  table.refresh(dirty, data_encodings, query_encodings, scheme);
  return dirty;
}

UpdateIndex UpdateIndex::build(const UpdateBatch& batch, bool inserts) {
  UpdateIndex idx;
  for (const EdgeUpdate& up : batch.updates()) {
    if (up.is_insert() != inserts) continue;
    idx.order_by_pair.emplace(edge_pair_key(up.u, up.v), up.order);
  }
  return idx;
}

std::optional<std::uint32_t> UpdateIndex::order_of(VertexId a, VertexId b) const {
  auto it = order_by_pair.find(edge_pair_key(a, b));
  if (it == order_by_pair.end()) return std::nullopt;
  return it->second;
}

std::vector<AnchorTarget> map_update_to_query_edges(const QueryGraph& q, LabelId label_u,
                                                    LabelId label_v,
                                                    std::optional<LabelId> edge_label,
                                                    const QueryPlan& plan, bool coalesce) {
  std::vector<AnchorTarget> targets;
  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    if (coalesce && plan.edge_plans[e].suppressed) continue;
    const QueryEdge& qe = q.edge(e);
    if (qe.label != edge_label) continue;
    if (q.label(qe.a) == label_u && q.label(qe.b) == label_v) targets.push_back({e, false});
    if (q.label(qe.a) == label_v && q.label(qe.b) == label_u) targets.push_back({e, true});
  }
  return targets;
}

namespace {

std::vector<VertexId> intersect_sorted(const std::vector<VertexId>& a,
                                       const std::vector<VertexId>& b, MatchStats* stats) {
  const std::vector<VertexId>& small = a.size() <= b.size() ? a : b;
  const std::vector<VertexId>& large = a.size() <= b.size() ? b : a;
  std::vector<VertexId> out;
  out.reserve(small.size());
  std::uint64_t ops = 0;
  std::uint64_t probe_cost = 1 + std::bit_width(large.size());
  for (VertexId x : small) {
    ops += probe_cost;
    if (std::binary_search(large.begin(), large.end(), x)) out.push_back(x);
  }
  if (stats) stats->intersection_ops += ops;
  return out;
}

std::vector<VertexId> labeled_neighbors(const LabeledGraph& g, VertexId v,
                                        std::optional<LabelId> edge_label) {
  if (!edge_label) return g.neighbors(v);
  std::vector<VertexId> out;
  g.for_each_neighbor(v, [&](VertexId w) {
    if (g.edge_label(v, w) == edge_label) out.push_back(w);
  });
  return out;
}

}  // namespace

std::vector<VertexId> gen_candidates(const LabeledGraph& g, const QueryGraph& q,
                                     const std::vector<VertexId>& assignment,
                                     const MatchingOrder& order, std::size_t level,
                                     const CandidateTable& table, MatchStats* stats) {
  QueryVertexId u = order.order[level];
  std::vector<VertexId> res = table.column(u);
  for (std::size_t i = 0; i < level && !res.empty(); ++i) {
    QueryVertexId prev = order.order[i];
    if (!q.adjacent(prev, u)) continue;
    std::vector<VertexId> nbrs = labeled_neighbors(g, assignment[i], q.edge_label(prev, u));
    res = intersect_sorted(res, nbrs, stats);
  }
  if (!res.empty()) {
    std::erase_if(res, [&](VertexId v) {
      for (std::size_t i = 0; i < level; ++i) {
        if (assignment[i] == v) return true;
      }
      return false;
    });
  }
  return res;
}

bool dedupe_by_order(const Match& m, const QueryGraph& q, std::uint32_t anchor_order,
                     const UpdateIndex& updates) {
  for (const QueryEdge& e : q.edges()) {
    auto order = updates.order_of(m.image[e.a], m.image[e.b]);
    if (order && *order < anchor_order) return false;
  }
  return true;
}

ExpandedPartials coalesced_expand(const std::vector<VertexId>& partial,
                                  const MatchingOrder& order, const CoalescedGroup& group,
                                  const QueryGraph& q, const CandidateTable& table) {
  auto positions_ok = [&](const std::vector<VertexId>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!table.is_candidate(p[i], order.order[i])) return false;
    }
    return true;
  };
  ExpandedPartials out;
  out.identity_ok = positions_ok(partial);
  std::vector<VertexId> image(q.vertex_count(), kInvalidVertex);
  for (std::size_t i = 0; i < partial.size(); ++i) image[order.order[i]] = partial[i];
  for (const VertexMapping& phi : group.expansions) {
    std::vector<VertexId> variant(partial.size());
    for (std::size_t i = 0; i < partial.size(); ++i) {
      variant[i] = image[phi[order.order[i]]];
    }
    if (positions_ok(variant)) out.variants.push_back(std::move(variant));
  }
  return out;
}

namespace {

struct TaskContext {
  const LabeledGraph& g;
  const QueryGraph& q;
  const QueryPlan& plan;
  const CandidateTable& table;
  UpdateIndex updates;
  bool coalesce;
};

struct BoardGuard {
  ProgressBoard& board;
  BoardGuard(ProgressBoard& b, SearchState* st, const MatchTask* task) : board(b) {
    std::lock_guard<std::mutex> lk(board.m);
    board.state = st;
    board.task = task;
  }
  ~BoardGuard() {
    std::lock_guard<std::mutex> lk(board.m);
    board.state = nullptr;
    board.task = nullptr;
  }
};

// Joins the group's detached degree-1 vertices onto a completed DFS part and
// emits every extension that survives the duplicate-order rule.
void emit_with_joins(const TaskContext& tctx, const MatchTask& task,
                     const MatchingOrder& order, const CoalescedGroup* group,
                     std::size_t n_dfs, const std::vector<VertexId>& assignment,
                     WorkerContext& ctx) {
  Match m;
  m.image.assign(tctx.q.vertex_count(), kInvalidVertex);
  for (std::size_t i = 0; i < n_dfs; ++i) m.image[order.order[i]] = assignment[i];

  const std::vector<QueryVertexId> no_tail;
  const std::vector<QueryVertexId>& tail = group ? group->join_tail : no_tail;

  auto finalize = [&]() {
    if (!dedupe_by_order(m, tctx.q, task.anchor.order, tctx.updates)) return;
    assert(validate_match(tctx.g, tctx.q, m));
    ctx.sink().push_back(m);
    ++ctx.stats().matches_emitted;
  };

  if (tail.empty()) {
    finalize();
    return;
  }
  auto join = [&](auto&& self, std::size_t ti) -> void {
    if (ti == tail.size()) {
      finalize();
      return;
    }
    QueryVertexId j = tail[ti];
    QueryVertexId parent = tctx.q.neighbors(j)[0];
    std::vector<VertexId> nbrs =
        labeled_neighbors(tctx.g, m.image[parent], tctx.q.edge_label(parent, j));
    std::vector<VertexId> cands = intersect_sorted(tctx.table.column(j), nbrs, &ctx.stats());
    for (VertexId c : cands) {
      ++ctx.stats().dfs_visits;
      bool used = false;
      for (VertexId v : m.image) {
        if (v == c) {
          used = true;
          break;
        }
      }
      if (used) continue;
      m.image[j] = c;
      self(self, ti + 1);
      m.image[j] = kInvalidVertex;
    }
  };
  join(join, 0);
}

void run_match_task(const MatchTask& task, WorkerContext& ctx, const TaskContext& tctx) {
  const EdgePlan& ep = tctx.plan.edge_plans[task.edge];
  const MatchingOrder& order = *ep.order;
  const CoalescedGroup* group =
      (tctx.coalesce && ep.group >= 0) ? &tctx.plan.groups[ep.group] : nullptr;
  std::size_t n = order.order.size();
  std::size_t n_dfs = n - (group ? group->join_tail.size() : 0);

  SearchState st;
  st.assignment.assign(n, kInvalidVertex);
  for (std::size_t i = 0; i < task.prefix.size(); ++i) st.assignment[i] = task.prefix[i];
  st.start_level = task.start_level;
  st.level = task.start_level;
  st.levels.resize(n_dfs);

  if (task.start_level >= n_dfs) {  // prefix is already a complete DFS part
    emit_with_joins(tctx, task, order, group, n_dfs, st.assignment, ctx);
    return;
  }

  ProgressBoard& board = ctx.board();
  BoardGuard guard(board, &st, &task);

  // Install the first level before entering the claim loop.
  std::vector<VertexId> first =
      task.seeded_candidates.empty()
          ? gen_candidates(tctx.g, tctx.q, st.assignment, order, task.start_level,
                           tctx.table, &ctx.stats())
          : task.seeded_candidates;
  {
    std::lock_guard<std::mutex> lk(board.m);
    SearchLevel& lv = st.levels[task.start_level];
    lv.candidates = std::move(first);
    lv.cursor = 0;
    lv.limit = static_cast<std::uint32_t>(lv.candidates.size());
  }

  std::uint32_t l = task.start_level;
  std::uint64_t poll = 0;
  while (true) {
    if ((++poll & 0x3f) == 0 && ctx.should_stop()) return;

    VertexId c = kInvalidVertex;
    {
      // Claim the next candidate, backtracking through exhausted levels.
      std::lock_guard<std::mutex> lk(board.m);
      while (st.levels[l].cursor >= st.levels[l].limit) {
        if (l == task.start_level) return;  // guard clears the board
        --l;
        st.level = l;
      }
      c = st.levels[l].candidates[st.levels[l].cursor++];
    }
    ++ctx.stats().dfs_visits;
    ctx.passive_tick();

    st.assignment[l] = c;
    if (group && !task.past_boundary && l + 1 == task.boundary) {
      std::vector<VertexId> partial(st.assignment.begin(),
                                    st.assignment.begin() + task.boundary);
      ExpandedPartials expanded = coalesced_expand(partial, order, *group, tctx.q, tctx.table);
      for (auto& variant : expanded.variants) {
        MatchTask vt;
        vt.edge = task.edge;
        vt.anchor = task.anchor;
        vt.flipped = task.flipped;
        vt.prefix = std::move(variant);
        vt.start_level = task.boundary;
        vt.boundary = task.boundary;
        vt.past_boundary = true;
        ctx.spawn(std::move(vt));
      }
      if (!expanded.identity_ok) continue;
    }
    if (l + 1 == n_dfs) {
      emit_with_joins(tctx, task, order, group, n_dfs, st.assignment, ctx);
      continue;
    }
    std::vector<VertexId> next = gen_candidates(tctx.g, tctx.q, st.assignment, order, l + 1,
                                                tctx.table, &ctx.stats());
    if (next.empty()) continue;
    {
      std::lock_guard<std::mutex> lk(board.m);
      SearchLevel& lv = st.levels[l + 1];
      lv.candidates = std::move(next);
      lv.cursor = 0;
      lv.limit = static_cast<std::uint32_t>(lv.candidates.size());
      st.level = l + 1;
    }
    ++l;
  }
}

MatchTask make_stolen_task(const MatchTask& victim, const SearchState& st,
                           std::uint32_t level, std::vector<VertexId> range) {
  MatchTask t;
  t.edge = victim.edge;
  t.anchor = victim.anchor;
  t.flipped = victim.flipped;
  t.prefix.assign(st.assignment.begin(), st.assignment.begin() + level);
  t.start_level = level;
  t.seeded_candidates = std::move(range);
  t.boundary = victim.boundary;
  t.past_boundary = victim.past_boundary || level >= victim.boundary;
  return t;
}

}  // namespace

PhaseResult match_phase(const LabeledGraph& g, const QueryGraph& q, const QueryPlan& plan,
                        const CandidateTable& table, const UpdateBatch& batch,
                        MatchPhase phase, const MatchOptions& opts, MatchStats& stats) {
  bool want_inserts = phase == MatchPhase::kPositive;
  TaskContext tctx{g, q, plan, table, UpdateIndex::build(batch, want_inserts), opts.coalesce};

  std::vector<MatchTask> tasks;
  for (const EdgeUpdate& up : batch.updates()) {
    if (up.is_insert() != want_inserts) continue;
    std::optional<LabelId> el = up.is_insert() ? up.edge_label : g.edge_label(up.u, up.v);
    auto targets =
        map_update_to_query_edges(q, g.label(up.u), g.label(up.v), el, plan, opts.coalesce);
    for (const AnchorTarget& target : targets) {
      MatchTask task;
      task.edge = target.edge;
      task.anchor = up;
      task.flipped = target.flipped;
      task.prefix = target.flipped ? std::vector<VertexId>{up.v, up.u}
                                   : std::vector<VertexId>{up.u, up.v};
      task.start_level = 2;
      if (opts.coalesce && plan.edge_plans[target.edge].group >= 0) {
        const CoalescedGroup& grp = plan.groups[plan.edge_plans[target.edge].group];
        task.boundary = static_cast<std::uint32_t>(std::popcount(grp.retained_mask));
      }
      tasks.push_back(std::move(task));
    }
  }

  TaskEngine engine;
  engine.run = [&tctx](const MatchTask& task, WorkerContext& ctx) {
    run_match_task(task, ctx, tctx);
  };
  engine.make_stolen = make_stolen_task;

  WorkerPool pool(opts.scheduler);
  auto out = pool.run_tasks(std::move(tasks), engine, stats, opts.deadline);

  std::sort(out.matches.begin(), out.matches.end());
  out.matches.erase(std::unique(out.matches.begin(), out.matches.end()), out.matches.end());
  return {std::move(out.matches), std::move(out.utilization)};
}

IncrementalMatchSet match_batch(LabeledGraph& g, const QueryGraph& q, const QueryPlan& plan,
                                QueryEncodingState& enc, const UpdateBatch& batch,
                                const MatchOptions& opts, MatchStats* stats_out) {
  std::vector<UpdateError> failures = g.validate_batch(batch);
  if (!failures.empty()) {
    throw BatchError("batch rejected: " + std::to_string(failures.size()) +
                         " invalid update(s), none applied",
                     std::move(failures));
  }
  MatchStats stats;
  IncrementalMatchSet out;
  out.negative =
      match_phase(g, q, plan, enc.table, batch, MatchPhase::kNegative, opts, stats).matches;
  g.apply_batch(batch);
  enc.refresh(g, batch);
  out.positive =
      match_phase(g, q, plan, enc.table, batch, MatchPhase::kPositive, opts, stats).matches;
  if (stats_out) stats_out->merge(stats);
  return out;
}

std::string format_match(char sign, const Match& m) {
  std::ostringstream os;
  os << sign;
  for (std::size_t u = 0; u < m.image.size(); ++u) {
    os << " u" << u << ":v" << m.image[u];
  }
  return os.str();
}

bool validate_match(const LabeledGraph& g, const QueryGraph& q, const Match& m) {
  if (m.image.size() != q.vertex_count()) return false;
  for (QueryVertexId u = 0; u < q.vertex_count(); ++u) {
    if (m.image[u] == kInvalidVertex) return false;
    if (g.label(m.image[u]) != q.label(u)) return false;
    for (QueryVertexId w = 0; w < u; ++w) {
      if (m.image[w] == m.image[u]) return false;
    }
  }
  for (const QueryEdge& e : q.edges()) {
    if (!g.has_edge(m.image[e.a], m.image[e.b])) return false;
    if (e.label != g.edge_label(m.image[e.a], m.image[e.b])) return false;
  }
  return true;
}

}  // namespace bdsm
