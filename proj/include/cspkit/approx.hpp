#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "cspkit/csp.hpp"
#include "cspkit/errors.hpp"

namespace cspkit {

// Convex combination of forests (edge-id sets) hitting per-edge marginals.
// In exact mode (simple constraint graphs) every marginal equals 2/(d+1);
// the last-resort arboricity fallback only guarantees marginal >= 1/ceil((d+1)/2).
struct ForestPart {
  double weight = 0.0;
  std::vector<int> edge_ids;  // sorted
};

struct ForestDistribution {
  std::vector<ForestPart> parts;
  std::map<int, double> marginals;
  bool exact_marginals = true;
};

struct PolytopeCheck {
  bool feasible = false;
  std::vector<int> violating_set;  // empty when feasible
};

namespace detail {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace detail

// Verifies x_e = 2/(d+1) lies in the forest polytope: x(E(S)) <= |S| - 1 for
// all S with |S| >= 2. Exhaustive over subsets up to 20 vertices (exact
// integer arithmetic); larger instances use the two-case degree bound, which
// covers every d-bounded graph.
inline PolytopeCheck check_forest_polytope(const CspInstance& inst, int d) {
  if (d < 1) throw ParameterError("check_forest_polytope: d must be >= 1");
  auto chk = validate_degrees(inst, DegreeSpec::bounded(d));
  if (!chk.ok)
    throw ParameterError("check_forest_polytope: graph degree exceeds d");
  PolytopeCheck out;
  out.feasible = true;
  if (inst.n > 20) return out;  // |S| in [2, d+1] and |S| > d+1 cases both hold
  std::vector<std::uint32_t> emask;
  emask.reserve(inst.edges.size());
  for (const auto& e : inst.edges)
    emask.push_back((std::uint32_t{1} << e.u) | (std::uint32_t{1} << e.v));
  for (std::uint32_t s = 1; s < (std::uint32_t{1} << inst.n); ++s) {
    const int size = std::popcount(s);
    if (size < 2) continue;
    long long inside = 0;
    for (std::uint32_t m : emask)
      if ((m & s) == m) ++inside;
    // 2*|E(S)|/(d+1) <= |S|-1  <=>  2*|E(S)| <= (|S|-1)*(d+1)
    if (2 * inside > static_cast<long long>(size - 1) * (d + 1)) {
      out.feasible = false;
      for (int v = 0; v < inst.n; ++v)
        if (s & (std::uint32_t{1} << v)) out.violating_set.push_back(v);
      return out;
    }
  }
  return out;
}

namespace detail {

// Partition all edges into k forests by matroid-union augmentation: to place
// an edge that closes a cycle in every forest, search for a chain of swaps
// moving some edge of a cycle into another forest.
inline std::optional<std::vector<std::vector<int>>> forest_partition(
    const CspInstance& inst, int k) {
  const int m = static_cast<int>(inst.edges.size());
  std::vector<int> owner(m, -1);  // forest index per edge position
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.edges[a].id < inst.edges[b].id;
  });

  auto forest_path = [&](int f, int from, int to) -> std::vector<int> {
    // edge positions on the path from..to inside forest f; empty if none
    std::vector<std::vector<std::pair<int, int>>> adj(inst.n);
    for (int i = 0; i < m; ++i)
      if (owner[i] == f) {
        adj[inst.edges[i].u].emplace_back(inst.edges[i].v, i);
        adj[inst.edges[i].v].emplace_back(inst.edges[i].u, i);
      }
    std::vector<int> via_edge(inst.n, -1), prev(inst.n, -1);
    std::queue<int> q;
    q.push(from);
    prev[from] = from;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      if (u == to) break;
      for (auto [w, ei] : adj[u])
        if (prev[w] == -1) {
          prev[w] = u;
          via_edge[w] = ei;
          q.push(w);
        }
    }
    std::vector<int> path;
    if (prev[to] == -1) return path;
    for (int v = to; v != from; v = prev[v]) path.push_back(via_edge[v]);
    return path;
  };

  auto acyclic_in = [&](int f, int u, int v) {
    Dsu dsu(inst.n);
    for (int i = 0; i < m; ++i)
      if (owner[i] == f) dsu.unite(inst.edges[i].u, inst.edges[i].v);
    return dsu.find(u) != dsu.find(v);
  };

  for (int pos : order) {
    // BFS over edges-to-place; parent pointers unwind the swap chain
    std::vector<int> bfs_edge{pos};
    std::vector<int> bfs_parent{-1};      // index into bfs arrays
    std::vector<int> bfs_forest{-1};      // forest the parent displaced from
    std::vector<char> enqueued(m, 0);
    enqueued[pos] = 1;
    int done = -1, done_forest = -1;
    for (std::size_t head = 0; head < bfs_edge.size() && done < 0; ++head) {
      const int ei = bfs_edge[head];
      const int u = inst.edges[ei].u, v = inst.edges[ei].v;
      for (int f = 0; f < k && done < 0; ++f) {
        if (owner[ei] == f) continue;
        if (acyclic_in(f, u, v)) {
          done = static_cast<int>(head);
          done_forest = f;
          break;
        }
        for (int ce : forest_path(f, u, v))
          if (!enqueued[ce]) {
            enqueued[ce] = 1;
            bfs_edge.push_back(ce);
            bfs_parent.push_back(static_cast<int>(head));
            bfs_forest.push_back(f);
          }
      }
    }
    if (done < 0) return std::nullopt;
    // unwind: place bfs_edge[done] in done_forest, its parent in the forest
    // it was displaced from, and so on up to the new edge
    int cur = done, f = done_forest;
    while (cur != -1) {
      const int nf = bfs_forest[cur];  // forest current edge vacates
      owner[bfs_edge[cur]] = f;
      f = nf;
      cur = bfs_parent[cur];
    }
  }

  std::vector<std::vector<int>> forests(k);
  for (int i = 0; i < m; ++i) forests[owner[i]].push_back(inst.edges[i].id);
  for (auto& fv : forests) std::sort(fv.begin(), fv.end());
  return forests;
}

}  // namespace detail

// Decomposes x_e = 2/(d+1) into a convex combination of forests. Greedy
// Caratheodory extraction is the default (exact marginals, support size at
// most |E| + 1); if it stalls, an exact doubled-edge arboricity construction
// takes over (still exact marginals, support at most d + 1).
inline ForestDistribution forest_decomposition(const CspInstance& inst, int d) {
  auto chk = validate_degrees(inst, DegreeSpec::bounded(d));
  if (!chk.ok)
    throw ParameterError("forest_decomposition: graph degree exceeds d");
  const int m = static_cast<int>(inst.edges.size());
  const double x = 2.0 / (d + 1);
  constexpr double kEps = 1e-12;

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.edges[a].id < inst.edges[b].id;
  });

  ForestDistribution out;
  std::vector<double> r(m, x);
  double w_left = 1.0;
  bool stalled = false;
  for (int iter = 0; iter <= 4 * m + 2; ++iter) {
    int live = 0;
    for (int i = 0; i < m; ++i)
      if (r[i] > kEps) ++live;
    if (live == 0) break;
    if (iter == 4 * m + 2) {
      stalled = true;
      break;
    }
    // maximal forest among live edges, largest residual first
    std::vector<int> cand;
    for (int i : order)
      if (r[i] > kEps) cand.push_back(i);
    std::stable_sort(cand.begin(), cand.end(),
                     [&](int a, int b) { return r[a] > r[b] + kEps; });
    detail::Dsu dsu(inst.n);
    ForestPart part;
    double min_in = w_left;
    std::vector<char> in_forest(m, 0);
    for (int i : cand)
      if (dsu.unite(inst.edges[i].u, inst.edges[i].v)) {
        in_forest[i] = 1;
        part.edge_ids.push_back(inst.edges[i].id);
        min_in = std::min(min_in, r[i]);
      }
    double max_out = 0.0;
    for (int i = 0; i < m; ++i)
      if (!in_forest[i] && r[i] > kEps) max_out = std::max(max_out, r[i]);
    double w = std::min({min_in, w_left - max_out, w_left});
    if (w <= kEps) {
      stalled = true;
      break;
    }
    part.weight = w;
    std::sort(part.edge_ids.begin(), part.edge_ids.end());
    for (int i = 0; i < m; ++i)
      if (in_forest[i]) r[i] = std::max(0.0, r[i] - w);
    w_left -= w;
    out.parts.push_back(std::move(part));
  }

  if (stalled) {
    // Exact fallback: duplicate every edge and partition the doubled edge set
    // into d+1 forests. Nash-Williams guarantees the partition exists for any
    // simple d-bounded graph, and the two copies of an edge land in distinct
    // forests (they would close a 2-cycle together), so a uniform mixture over
    // the d+1 forests puts each edge in exactly 2 of them: marginal 2/(d+1).
    CspInstance doubled;
    doubled.n = inst.n;
    doubled.alphabet_sizes = inst.alphabet_sizes;
    std::vector<int> orig_id(2 * m);
    {
      int pos = 0;
      for (int i : order)
        for (int copy = 0; copy < 2; ++copy) {
          CspEdge e = inst.edges[i];
          e.id = pos;
          orig_id[pos] = inst.edges[i].id;
          doubled.edges.push_back(std::move(e));
          ++pos;
        }
    }
    auto forests = detail::forest_partition(doubled, d + 1);
    if (forests) {
      out = ForestDistribution{};
      std::map<std::vector<int>, double> merged;
      for (auto& fv : *forests) {
        std::vector<int> ids;
        ids.reserve(fv.size());
        for (int cid : fv) ids.push_back(orig_id[cid]);
        std::sort(ids.begin(), ids.end());
        merged[std::move(ids)] += 1.0 / (d + 1);
      }
      for (auto& [ids, w] : merged) out.parts.push_back({w, ids});
    } else {
      // Only reachable off the simple-graph precondition (parallel edges):
      // uniform mixture over an arboricity partition, inexact marginals.
      const int k = (d + 2) / 2;  // ceil((d+1)/2)
      auto loose = detail::forest_partition(inst, k);
      if (!loose)
        throw InternalError("forest_decomposition: arboricity fallback failed");
      out = ForestDistribution{};
      out.exact_marginals = false;
      for (auto& fv : *loose) out.parts.push_back({1.0 / k, std::move(fv)});
    }
  } else if (w_left > kEps) {
    out.parts.push_back({w_left, {}});  // pad with the empty forest
  }

  for (const auto& e : inst.edges) out.marginals[e.id] = 0.0;
  for (const auto& part : out.parts)
    for (int id : part.edge_ids) out.marginals[id] += part.weight;
  return out;
}

struct TreeDpResult {
  Assignment assignment;
  long long satisfied = 0;  // satisfied forest edges
};

// Optimal assignment for the subinstance induced by an acyclic edge set.
// Vertices outside the forest get label 0; ties break toward the smallest
// label.
inline TreeDpResult tree_dp(const CspInstance& inst,
                            const std::vector<int>& forest_edge_ids) {
  std::map<int, const CspEdge*> by_id;
  for (const auto& e : inst.edges) by_id[e.id] = &e;
  std::vector<const CspEdge*> forest;
  for (int id : forest_edge_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw ParameterError("tree_dp: unknown edge id " + std::to_string(id));
    forest.push_back(it->second);
  }
  {
    detail::Dsu dsu(inst.n);
    for (const CspEdge* e : forest)
      if (!dsu.unite(e->u, e->v))
        throw ParameterError("tree_dp: edge set is not acyclic");
  }

  std::vector<std::vector<std::pair<int, const CspEdge*>>> adj(inst.n);
  for (const CspEdge* e : forest) {
    adj[e->u].emplace_back(e->v, e);
    adj[e->v].emplace_back(e->u, e);
  }

  TreeDpResult out;
  out.assignment.assign(inst.n, 0);
  std::vector<char> visited(inst.n, 0);
  // A[v][s]: best count in v's subtree with v labeled s
  std::vector<std::vector<long long>> table(inst.n);

  for (int root = 0; root < inst.n; ++root) {
    if (visited[root] || adj[root].empty()) continue;
    // iterative post-order
    std::vector<std::pair<int, int>> stack{{root, -1}};  // (vertex, parent)
    std::vector<std::pair<int, int>> post;
    visited[root] = 1;
    while (!stack.empty()) {
      auto [v, par] = stack.back();
      stack.pop_back();
      post.emplace_back(v, par);
      for (auto [w, e] : adj[v])
        if (w != par) {
          visited[w] = 1;
          stack.push_back({w, v});
        }
    }
    for (auto it = post.rbegin(); it != post.rend(); ++it) {
      auto [v, par] = *it;
      table[v].assign(inst.alphabet_sizes[v], 0);
      for (auto [w, e] : adj[v]) {
        if (w == par) continue;
        for (int s = 0; s < inst.alphabet_sizes[v]; ++s) {
          long long best = -1;
          for (int sw = 0; sw < inst.alphabet_sizes[w]; ++sw) {
            const bool sat =
                e->u == v ? e->allows(s, sw) : e->allows(sw, s);
            const long long cand = table[w][sw] + (sat ? 1 : 0);
            if (cand > best) best = cand;
          }
          table[v][s] += best;
        }
      }
    }
    // pick root label, then descend choosing the smallest optimal label
    int root_label = 0;
    for (int s = 1; s < inst.alphabet_sizes[root]; ++s)
      if (table[root][s] > table[root][root_label]) root_label = s;
    out.assignment[root] = root_label;
    out.satisfied += table[root][root_label];
    std::vector<std::pair<int, int>> down{{root, -1}};
    while (!down.empty()) {
      auto [v, par] = down.back();
      down.pop_back();
      for (auto [w, e] : adj[v]) {
        if (w == par) continue;
        const int s = out.assignment[v];
        int best_label = 0;
        long long best = -1;
        for (int sw = 0; sw < inst.alphabet_sizes[w]; ++sw) {
          const bool sat = e->u == v ? e->allows(s, sw) : e->allows(sw, s);
          const long long cand = table[w][sw] + (sat ? 1 : 0);
          if (cand > best) {
            best = cand;
            best_label = sw;
          }
        }
        out.assignment[w] = best_label;
        down.push_back({w, v});
      }
    }
  }
  return out;
}

struct ApproxResult {
  Assignment assignment;
  double value = 0.0;            // fraction of all edges satisfied
  long long satisfied = 0;
  ForestDistribution certificate;
  std::vector<long long> dp_counts;  // per-part forest-DP optima
  double weighted_dp = 0.0;          // sum_i weight_i * dp_counts_i
};

// The (d+1)/2-approximation: decompose x_e = 2/(d+1) into forests, solve each
// forest exactly by DP, evaluate every candidate on the full instance, and
// return the best.
inline ApproxResult approx_solve(const CspInstance& inst, int d) {
  if (inst.edges.empty())
    throw DegenerateError("approx_solve on zero-edge instance");
  ApproxResult out;
  out.certificate = forest_decomposition(inst, d);
  long long best_sat = -1;
  for (const auto& part : out.certificate.parts) {
    auto dp = tree_dp(inst, part.edge_ids);
    out.dp_counts.push_back(dp.satisfied);
    out.weighted_dp += part.weight * static_cast<double>(dp.satisfied);
    long long sat = 0;
    for (const auto& e : inst.edges)
      if (e.allows(dp.assignment[e.u], dp.assignment[e.v])) ++sat;
    if (sat > best_sat) {
      best_sat = sat;
      out.assignment = std::move(dp.assignment);
    }
  }
  out.satisfied = best_sat;
  out.value =
      static_cast<double>(best_sat) / static_cast<double>(inst.edges.size());
  return out;
}

}  // namespace cspkit
