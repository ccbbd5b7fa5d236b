#include "bdsm/query_analysis.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <map>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace bdsm {

namespace {

struct InducedView {
  std::vector<QueryVertexId> verts;            // ascending global ids
  std::vector<std::uint32_t> local_adj;        // bitmask over local indices
  std::vector<LabelId> labels;
  std::vector<std::uint32_t> degrees;
};

InducedView make_view(const QueryGraph& q, const std::vector<QueryVertexId>& retained) {
  InducedView v;
  v.verts = retained;
  std::sort(v.verts.begin(), v.verts.end());
  std::size_t m = v.verts.size();
  v.local_adj.assign(m, 0);
  v.labels.resize(m);
  v.degrees.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    v.labels[i] = q.label(v.verts[i]);
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && q.adjacent(v.verts[i], v.verts[j])) {
        v.local_adj[i] |= 1u << j;
        ++v.degrees[i];
      }
    }
  }
  return v;
}

void automorphism_backtrack(const QueryGraph& q, const InducedView& view,
                            std::vector<std::uint32_t>& image, std::uint32_t used,
                            std::size_t depth, std::vector<VertexMapping>& out,
                            std::size_t limit, bool* truncated) {
  std::size_t m = view.verts.size();
  if (truncated && *truncated) return;
  if (depth == m) {
    VertexMapping mapping(q.vertex_count());
    std::iota(mapping.begin(), mapping.end(), 0);
    for (std::size_t i = 0; i < m; ++i) mapping[view.verts[i]] = view.verts[image[i]];
    out.push_back(std::move(mapping));
    if (limit != 0 && out.size() > limit && truncated) *truncated = true;
    return;
  }
  for (std::uint32_t c = 0; c < m; ++c) {
    if ((used >> c) & 1u) continue;
    if (view.labels[c] != view.labels[depth]) continue;
    if (view.degrees[c] != view.degrees[depth]) continue;
    bool ok = true;
    for (std::size_t j = 0; j < depth && ok; ++j) {
      bool adj_orig = (view.local_adj[depth] >> j) & 1u;
      bool adj_img = (view.local_adj[c] >> image[j]) & 1u;
      if (adj_orig != adj_img) {
        ok = false;
      } else if (adj_orig) {
        // Edge labels must survive the mapping as well.
        auto l1 = q.edge_label(view.verts[depth], view.verts[j]);
        auto l2 = q.edge_label(view.verts[c], view.verts[image[j]]);
        if (l1 != l2) ok = false;
      }
    }
    if (!ok) continue;
    image[depth] = c;
    automorphism_backtrack(q, view, image, used | (1u << c), depth + 1, out, limit,
                           truncated);
    if (truncated && *truncated) return;
  }
}

using LabelCounts = std::map<LabelId, std::uint32_t>;

LabelCounts nlf_counts(const QueryGraph& q, QueryVertexId u) {
  LabelCounts counts;
  for (QueryVertexId w : q.neighbors(u)) ++counts[q.label(w)];
  return counts;
}

bool nlf_dominates(const LabelCounts& a, const LabelCounts& b) {
  for (const auto& [label, count] : b) {
    auto it = a.find(label);
    if (it == a.end() || it->second < count) return false;
  }
  return true;
}

VertexMapping invert(const VertexMapping& m) {
  VertexMapping inv(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) inv[m[i]] = static_cast<QueryVertexId>(i);
  return inv;
}

bool maps_edge(const VertexMapping& phi, const QueryEdge& from, const QueryEdge& to) {
  return (phi[from.a] == to.a && phi[from.b] == to.b) ||
         (phi[from.a] == to.b && phi[from.b] == to.a);
}

// A mapping phi (phi(e_star) = e_other) is safe for coalesced search when a
// partial match found through e_other, pulled back onto e_star, still passes
// every per-position candidate filter: each non-anchor retained position w
// must be no more constrained than the position phi^-1(w) it borrows from.
bool mapping_is_safe(const std::vector<LabelCounts>& nlf,
                     const DegeneratedAutomorphicSubgraph& entry,
                     const VertexMapping& phi, const QueryEdge& anchor) {
  VertexMapping inv = invert(phi);
  for (QueryVertexId w : entry.retained) {
    if (anchor.touches(w)) continue;
    if (inv[w] == w) continue;
    if (!nlf_dominates(nlf[inv[w]], nlf[w])) return false;
  }
  return true;
}

const VertexMapping* find_safe_mapping(const QueryGraph& q,
                                       const std::vector<LabelCounts>& nlf,
                                       const DegeneratedAutomorphicSubgraph& entry,
                                       std::size_t e_star, std::size_t e_other) {
  const QueryEdge& from = q.edge(e_star);
  const QueryEdge& to = q.edge(e_other);
  for (const VertexMapping& phi : entry.mappings) {
    if (!maps_edge(phi, from, to)) continue;
    if (mapping_is_safe(nlf, entry, phi, from)) return &phi;
  }
  return nullptr;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<VertexMapping> enumerate_automorphisms(const QueryGraph& q) {
  std::vector<QueryVertexId> all(q.vertex_count());
  std::iota(all.begin(), all.end(), 0);
  return enumerate_automorphisms(q, all);
}

std::vector<VertexMapping> enumerate_automorphisms(const QueryGraph& q,
                                                   const std::vector<QueryVertexId>& retained,
                                                   std::size_t limit, bool* truncated) {
  InducedView view = make_view(q, retained);
  std::vector<std::uint32_t> image(view.verts.size());
  std::vector<VertexMapping> out;
  bool trunc = false;
  automorphism_backtrack(q, view, image, 0, 0, out, limit, &trunc);
  if (truncated) *truncated = trunc;
  return out;
}

std::vector<DegeneratedAutomorphicSubgraph> find_k_degenerated_subgraphs(
    const QueryGraph& q, const KDegenOptions& opts) {
  std::size_t n = q.vertex_count();
  std::vector<DegeneratedAutomorphicSubgraph> entries;
  if (n > 16) return entries;  // subset enumeration is meant for small patterns
  int max_k = opts.max_k >= 0 ? opts.max_k : static_cast<int>(n) - 3;
  for (int k = 0; k <= max_k; ++k) {
    std::size_t size = n - static_cast<std::size_t>(k);
    if (size < 3) break;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
      std::vector<QueryVertexId> retained;
      std::vector<QueryVertexId> removed;
      for (QueryVertexId u = 0; u < n; ++u) {
        ((mask >> u) & 1u ? retained : removed).push_back(u);
      }
      bool truncated = false;
      std::vector<VertexMapping> autos =
          enumerate_automorphisms(q, retained, opts.automorphism_limit, &truncated);
      if (truncated) continue;  // pathological symmetry, not worth coalescing
      std::vector<VertexMapping> non_id;
      for (auto& m : autos) {
        bool identity = true;
        for (std::size_t i = 0; i < m.size() && identity; ++i) {
          identity = m[i] == i;
        }
        if (!identity) non_id.push_back(std::move(m));
      }
      if (non_id.empty()) continue;

      // Edge orbits under the automorphism group; each orbit of two or more
      // edges is an equivalent edge set.
      std::vector<std::size_t> induced_edges;
      for (std::size_t e = 0; e < q.edge_count(); ++e) {
        if (((mask >> q.edge(e).a) & 1u) && ((mask >> q.edge(e).b) & 1u)) {
          induced_edges.push_back(e);
        }
      }
      DisjointSet ds(q.edge_count());
      for (const VertexMapping& phi : non_id) {
        for (std::size_t e : induced_edges) {
          int target = q.edge_index(phi[q.edge(e).a], phi[q.edge(e).b]);
          assert(target >= 0);
          ds.unite(e, static_cast<std::size_t>(target));
        }
      }
      std::map<std::size_t, std::vector<std::size_t>> orbits;
      for (std::size_t e : induced_edges) orbits[ds.find(e)].push_back(e);
      for (auto& [root, orbit] : orbits) {
        if (orbit.size() < 2) continue;
        DegeneratedAutomorphicSubgraph entry;
        entry.k = static_cast<std::uint32_t>(k);
        entry.retained = retained;
        entry.removed = removed;
        entry.equivalent_edges = orbit;
        entry.mappings = non_id;
        entries.push_back(std::move(entry));
      }
    }
  }
  entries = resolve_overlaps(std::move(entries));
  for (auto& entry : entries) entry.prioritized_edge = select_prioritized_edge(entry, q);
  return entries;
}

std::vector<DegeneratedAutomorphicSubgraph> resolve_overlaps(
    std::vector<DegeneratedAutomorphicSubgraph> entries) {
  std::vector<std::size_t> original_size(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    original_size[i] = entries[i].equivalent_edges.size();
  }
  std::map<std::size_t, std::vector<std::size_t>> holders;  // edge -> entry indices
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t e : entries[i].equivalent_edges) holders[e].push_back(i);
  }
  for (auto& [edge, owners] : holders) {
    if (owners.size() < 2) continue;
    std::size_t winner = owners[0];
    for (std::size_t idx : owners) {
      bool better = entries[idx].k < entries[winner].k ||
                    (entries[idx].k == entries[winner].k &&
                     (original_size[idx] > original_size[winner] ||
                      (original_size[idx] == original_size[winner] && idx < winner)));
      if (better) winner = idx;
    }
    for (std::size_t idx : owners) {
      if (idx == winner) continue;
      auto& edges = entries[idx].equivalent_edges;
      edges.erase(std::remove(edges.begin(), edges.end(), edge), edges.end());
    }
  }
  std::vector<DegeneratedAutomorphicSubgraph> kept;
  for (auto& entry : entries) {
    if (entry.equivalent_edges.size() >= 2) kept.push_back(std::move(entry));
  }
  return kept;
}

std::size_t select_prioritized_edge(const DegeneratedAutomorphicSubgraph& entry,
                                    const QueryGraph& q) {
  assert(entry.equivalent_edges.size() >= 2);
  std::vector<LabelCounts> nlf(q.vertex_count());
  for (QueryVertexId u = 0; u < q.vertex_count(); ++u) nlf[u] = nlf_counts(q, u);
  std::size_t best = entry.equivalent_edges.front();
  std::size_t best_score = 0;
  bool first = true;
  for (std::size_t e : entry.equivalent_edges) {
    std::size_t score = 0;
    for (std::size_t other : entry.equivalent_edges) {
      if (other == e) continue;
      if (find_safe_mapping(q, nlf, entry, e, other) != nullptr) ++score;
    }
    if (first || score > best_score || (score == best_score && e < best)) {
      best = e;
      best_score = score;
      first = false;
    }
  }
  return best;
}

namespace {

// Greedy selectivity order: fewest candidates relative to degree first,
// ties broken by higher degree then lower id. When `zone` is non-zero the
// first phase stays inside it (retained-set-first orders for coalesced
// anchors); `tail` vertices are appended last in id order.
std::optional<MatchingOrder> try_order(const QueryGraph& q, std::size_t anchor_edge,
                                       const CandidateTable& table, std::uint32_t zone,
                                       const std::vector<QueryVertexId>& tail) {
  const QueryEdge& anchor = q.edge(anchor_edge);
  std::size_t n = q.vertex_count();
  MatchingOrder mo;
  mo.anchor_edge = anchor_edge;
  mo.order = {anchor.a, anchor.b};
  std::uint32_t assigned = (1u << anchor.a) | (1u << anchor.b);
  std::uint32_t tail_mask = 0;
  for (QueryVertexId t : tail) tail_mask |= 1u << t;

  auto selectivity = [&](QueryVertexId u) {
    return static_cast<double>(table.column(u).size()) /
           static_cast<double>(std::max<std::size_t>(q.degree(u), 1));
  };
  auto pick_next = [&](std::uint32_t pool) -> int {
    int best = -1;
    for (QueryVertexId u = 0; u < n; ++u) {
      if (!((pool >> u) & 1u) || ((assigned >> u) & 1u)) continue;
      if (!(q.neighbor_mask(u) & assigned)) continue;  // prefix connectivity
      if (best < 0) {
        best = static_cast<int>(u);
        continue;
      }
      auto bu = static_cast<QueryVertexId>(best);
      double su = selectivity(u), sb = selectivity(bu);
      if (su < sb || (su == sb && (q.degree(u) > q.degree(bu) ||
                                   (q.degree(u) == q.degree(bu) && u < bu)))) {
        best = static_cast<int>(u);
      }
    }
    return best;
  };

  std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1;
  if (zone != 0) {
    while ((assigned & zone) != zone) {
      int next = pick_next(zone);
      if (next < 0) return std::nullopt;  // retained set not connected from anchor
      mo.order.push_back(static_cast<QueryVertexId>(next));
      assigned |= 1u << next;
    }
  }
  std::uint32_t body = all & ~tail_mask;
  while ((assigned & body) != body) {
    int next = pick_next(body);
    if (next < 0) return std::nullopt;
    mo.order.push_back(static_cast<QueryVertexId>(next));
    assigned |= 1u << next;
  }
  for (QueryVertexId t : tail) {
    if ((assigned >> t) & 1u) continue;
    mo.order.push_back(t);
    assigned |= 1u << t;
  }
  mo.position.assign(n, 0);
  for (std::size_t i = 0; i < mo.order.size(); ++i) mo.position[mo.order[i]] = static_cast<std::uint32_t>(i);
  return mo;
}

}  // namespace

MatchingOrder generate_matching_order(const QueryGraph& q, std::size_t anchor_edge,
                                      const CandidateTable& table) {
  auto mo = try_order(q, anchor_edge, table, 0, {});
  if (!mo) throw std::invalid_argument("disconnected query graph");
  return *mo;
}

QueryPlan build_query_plan(const QueryGraph& q, const CandidateTable& table,
                           const PlanOptions& opts) {
  if (!q.connected()) throw std::invalid_argument("disconnected query graph");
  QueryPlan plan;
  plan.entries = find_k_degenerated_subgraphs(q, opts.kdegen);
  plan.edge_plans.resize(q.edge_count());

  std::vector<LabelCounts> nlf(q.vertex_count());
  for (QueryVertexId u = 0; u < q.vertex_count(); ++u) nlf[u] = nlf_counts(q, u);

  for (std::size_t ei = 0; ei < plan.entries.size(); ++ei) {
    const auto& entry = plan.entries[ei];
    std::uint32_t retained_mask = 0;
    for (QueryVertexId u : entry.retained) retained_mask |= 1u << u;
    std::vector<QueryVertexId> join_tail;
    for (QueryVertexId r : entry.removed) {
      if (q.degree(r) == 1) join_tail.push_back(r);
    }

    std::vector<std::size_t> remaining = entry.equivalent_edges;
    while (remaining.size() >= 2) {
      // Best coverage first; singletons fall back to standalone search.
      std::size_t best = remaining.front();
      std::vector<std::pair<std::size_t, const VertexMapping*>> best_covered;
      for (std::size_t e : remaining) {
        std::vector<std::pair<std::size_t, const VertexMapping*>> covered;
        for (std::size_t other : remaining) {
          if (other == e) continue;
          if (const VertexMapping* phi = find_safe_mapping(q, nlf, entry, e, other)) {
            covered.emplace_back(other, phi);
          }
        }
        if (covered.size() > best_covered.size() ||
            (covered.size() == best_covered.size() && e < best)) {
          best = e;
          best_covered = std::move(covered);
        }
      }
      if (best_covered.empty()) break;  // nothing safely coverable in this set

      auto order = try_order(q, best, table, retained_mask, join_tail);
      if (!order) break;  // retained set unreachable from this anchor

      CoalescedGroup group;
      group.entry_index = ei;
      group.prioritized_edge = best;
      group.retained_mask = retained_mask;
      group.join_tail = join_tail;
      for (auto& [other, phi] : best_covered) {
        group.covered_edges.push_back(other);
        group.expansions.push_back(*phi);
      }
      std::size_t gi = plan.groups.size();
      plan.groups.push_back(std::move(group));

      plan.edge_plans[best].order = std::move(*order);
      plan.edge_plans[best].group = static_cast<int>(gi);
      for (std::size_t covered : plan.groups[gi].covered_edges) {
        plan.edge_plans[covered].suppressed = true;
        auto covered_order = try_order(q, covered, table, retained_mask, join_tail);
        assert(covered_order.has_value());
        plan.edge_plans[covered].order = std::move(*covered_order);
      }
      std::erase_if(remaining, [&](std::size_t e) {
        return e == best ||
               std::find(plan.groups[gi].covered_edges.begin(),
                         plan.groups[gi].covered_edges.end(),
                         e) != plan.groups[gi].covered_edges.end();
      });
    }
  }

  for (std::size_t e = 0; e < q.edge_count(); ++e) {
    if (!plan.edge_plans[e].order) {
      plan.edge_plans[e].order = generate_matching_order(q, e, table);
    }
  }
  plan.column_sizes.resize(q.vertex_count());
  for (QueryVertexId u = 0; u < q.vertex_count(); ++u) {
    plan.column_sizes[u] = table.column(u).size();
  }
  return plan;
}

double plan_column_drift(const QueryPlan& plan, const CandidateTable& table) {
  std::size_t total = 0;
  std::size_t delta = 0;
  for (std::size_t u = 0; u < plan.column_sizes.size(); ++u) {
    std::size_t now = table.column(static_cast<QueryVertexId>(u)).size();
    std::size_t then = plan.column_sizes[u];
    total += then;
    delta += now > then ? now - then : then - now;
  }
  return static_cast<double>(delta) / static_cast<double>(std::max<std::size_t>(total, 1));
}

std::string plan_to_json(const QueryPlan& plan, const QueryGraph& q) {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  for (const auto& entry : plan.entries) {
    nlohmann::json je;
    je["k"] = entry.k;
    je["retained"] = entry.retained;
    je["removed"] = entry.removed;
    je["equivalent_edges"] = nlohmann::json::array();
    for (std::size_t e : entry.equivalent_edges) {
      je["equivalent_edges"].push_back({q.edge(e).a, q.edge(e).b});
    }
    je["prioritized_edge"] = {q.edge(entry.prioritized_edge).a, q.edge(entry.prioritized_edge).b};
    je["automorphisms"] = entry.mappings.size();
    j["entries"].push_back(std::move(je));
  }
  j["groups"] = nlohmann::json::array();
  for (const auto& g : plan.groups) {
    nlohmann::json jg;
    jg["prioritized_edge"] = {q.edge(g.prioritized_edge).a, q.edge(g.prioritized_edge).b};
    jg["covered_edges"] = nlohmann::json::array();
    for (std::size_t e : g.covered_edges) {
      jg["covered_edges"].push_back({q.edge(e).a, q.edge(e).b});
    }
    jg["join_tail"] = g.join_tail;
    j["groups"].push_back(std::move(jg));
  }
  j["orders"] = nlohmann::json::array();
  for (std::size_t e = 0; e < plan.edge_plans.size(); ++e) {
    const auto& ep = plan.edge_plans[e];
    nlohmann::json jo;
    jo["anchor_edge"] = {q.edge(e).a, q.edge(e).b};
    jo["order"] = ep.order->order;
    jo["suppressed"] = ep.suppressed;
    jo["group"] = ep.group;
    j["orders"].push_back(std::move(jo));
  }
  return j.dump(2);
}

}  // namespace bdsm
