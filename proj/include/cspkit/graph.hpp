#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "cspkit/errors.hpp"
#include "cspkit/rng.hpp"

namespace cspkit {

// Undirected simple graph: sorted adjacency, no loops, no parallel edges.
class SimpleGraph {
 public:
  SimpleGraph() = default;
  explicit SimpleGraph(int n) : adj_(n) {
    if (n < 0) throw ValidationError("negative vertex count");
  }

  int num_vertices() const { return static_cast<int>(adj_.size()); }

  void add_edge(int u, int v) {
    const int n = num_vertices();
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw ValidationError("edge endpoint out of range");
    if (u == v) throw ValidationError("self-loop rejected");
    if (has_edge(u, v)) return;  // set semantics
    insert_sorted(adj_[u], v);
    insert_sorted(adj_[v], u);
    ++edge_count_;
  }

  bool has_edge(int u, int v) const {
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
  }

  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  std::size_t num_edges() const { return edge_count_; }

  // Lexicographically sorted edge list (u < v).
  std::vector<std::pair<int, int>> edge_list() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edge_count_);
    for (int u = 0; u < num_vertices(); ++u)
      for (int v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  bool is_regular(int* degree_out = nullptr) const {
    if (num_vertices() == 0) return false;
    const int d = degree(0);
    for (int v = 1; v < num_vertices(); ++v)
      if (degree(v) != d) return false;
    if (degree_out) *degree_out = d;
    return true;
  }

  bool is_connected() const {
    const int n = num_vertices();
    if (n == 0) return false;
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int cnt = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : adj_[u])
        if (!seen[w]) {
          seen[w] = 1;
          ++cnt;
          q.push(w);
        }
    }
    return cnt == n;
  }

  bool operator==(const SimpleGraph&) const = default;

 private:
  static void insert_sorted(std::vector<int>& v, int x) {
    v.insert(std::upper_bound(v.begin(), v.end(), x), x);
  }
  std::vector<std::vector<int>> adj_;
  std::size_t edge_count_ = 0;
};

struct IndepResult {
  int size = 0;
  std::vector<int> witness;
};

struct ClawWitness {
  int center = 0;
  std::vector<int> leaves;
};

inline constexpr int kDefaultExactCap = 40;

namespace detail {

// Branch-and-bound MIS on a bitmask universe (<= 64 vertices). Branches on
// the vertex of maximum degree within the candidate set: exclude it, or
// include it and drop its closed neighborhood.
class MisSolver {
 public:
  explicit MisSolver(std::vector<std::uint64_t> nbr) : nbr_(std::move(nbr)) {}

  int solve(std::uint64_t candidates) {
    best_ = 0;
    recurse(candidates, 0);
    return best_;
  }

 private:
  void recurse(std::uint64_t p, int chosen) {
    if (chosen + std::popcount(p) <= best_) return;
    if (p == 0) {
      best_ = std::max(best_, chosen);
      return;
    }
    // pick max-degree-in-p vertex
    int pick = -1, pick_deg = -1;
    for (std::uint64_t q = p; q;) {
      int v = std::countr_zero(q);
      q &= q - 1;
      int dv = std::popcount(nbr_[v] & p);
      if (dv > pick_deg) {
        pick_deg = dv;
        pick = v;
      }
    }
    if (pick_deg <= 1) {
      // remaining graph is paths/isolated pairs: greedy is exact
      int extra = 0;
      std::uint64_t q = p;
      while (q) {
        int v = std::countr_zero(q);
        q &= ~(nbr_[v] | (std::uint64_t{1} << v));
        ++extra;
      }
      best_ = std::max(best_, chosen + extra);
      return;
    }
    const std::uint64_t bit = std::uint64_t{1} << pick;
    recurse(p & ~(nbr_[pick] | bit), chosen + 1);
    recurse(p & ~bit, chosen);
  }

  std::vector<std::uint64_t> nbr_;
  int best_ = 0;
};

inline std::vector<std::uint64_t> neighbor_masks(const SimpleGraph& g) {
  std::vector<std::uint64_t> nbr(g.num_vertices(), 0);
  for (int u = 0; u < g.num_vertices(); ++u)
    for (int v : g.neighbors(u)) nbr[u] |= std::uint64_t{1} << v;
  return nbr;
}

}  // namespace detail

// Exact maximum independent set. The witness is the lexicographically
// smallest optimal vertex set.
inline IndepResult indep_exact(const SimpleGraph& g,
                               int cap = kDefaultExactCap) {
  const int n = g.num_vertices();
  if (n > cap || n > 64)
    throw SizeLimitError("indep_exact: " + std::to_string(n) +
                         " vertices exceeds cap " + std::to_string(cap));
  auto nbr = detail::neighbor_masks(g);
  detail::MisSolver solver(nbr);
  const std::uint64_t all =
      n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  IndepResult out;
  out.size = solver.solve(all);
  // lexicographically smallest witness: include v iff the optimum is still
  // reachable with v forced in
  std::uint64_t p = all;
  int have = 0;
  for (int v = 0; v < n && have < out.size; ++v) {
    if (!(p & (std::uint64_t{1} << v))) continue;
    // vertices below v are already decided, so p only holds w >= v
    std::uint64_t rest = p & ~(nbr[v] | (std::uint64_t{1} << v));
    if (have + 1 + solver.solve(rest) >= out.size) {
      out.witness.push_back(v);
      ++have;
      p = rest;
    } else {
      p &= ~(std::uint64_t{1} << v);
    }
  }
  return out;
}

inline bool is_independent(const SimpleGraph& g, const std::vector<int>& set) {
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j)
      if (g.has_edge(set[i], set[j])) return false;
  return true;
}

// Induced K_{1,k} search. For each center, looks for an independent set of
// size k inside the open neighborhood. Returns the witness with the smallest
// (center, leaves) in lexicographic order, or nullopt if the graph is
// k-claw-free.
inline std::optional<ClawWitness> find_claw(const SimpleGraph& g, int k,
                                            int cap = kDefaultExactCap) {
  if (k < 1) throw ParameterError("find_claw: k must be >= 1");
  for (int c = 0; c < g.num_vertices(); ++c) {
    const auto& nb = g.neighbors(c);
    const int m = static_cast<int>(nb.size());
    if (m < k) continue;
    if (m > cap || m > 64)
      throw SizeLimitError("find_claw: neighborhood of vertex " +
                           std::to_string(c) + " exceeds cap");
    // induced subgraph on the neighborhood (nb is sorted, so local index
    // order matches vertex order)
    SimpleGraph h(m);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (g.has_edge(nb[i], nb[j])) h.add_edge(i, j);
    auto nbr = detail::neighbor_masks(h);
    detail::MisSolver solver(nbr);
    const std::uint64_t all = (m == 64) ? ~std::uint64_t{0}
                                        : (std::uint64_t{1} << m) - 1;
    if (solver.solve(all) < k) continue;
    // lexicographically smallest independent k-subset of the neighborhood
    ClawWitness w;
    w.center = c;
    std::uint64_t p = all;
    for (int i = 0; i < m && static_cast<int>(w.leaves.size()) < k; ++i) {
      if (!(p & (std::uint64_t{1} << i))) continue;
      std::uint64_t rest = p & ~(nbr[i] | (std::uint64_t{1} << i));
      if (static_cast<int>(w.leaves.size()) + 1 + solver.solve(rest) >= k) {
        w.leaves.push_back(nb[i]);
        p = rest;
      } else {
        p &= ~(std::uint64_t{1} << i);
      }
    }
    return w;
  }
  return std::nullopt;
}

// |lambda_2| of the degree-normalized adjacency operator: magnitude of the
// second-largest-in-magnitude eigenvalue, i.e. the largest magnitude on the
// subspace orthogonal to the all-ones vector. Power iteration on the squared
// operator handles the +/- pairs of bipartite spectra.
inline double second_eigenvalue(const SimpleGraph& g) {
  int t = 0;
  if (!g.is_regular(&t) || t < 1)
    throw StructureError("second_eigenvalue: graph must be regular, t >= 1");
  if (!g.is_connected())
    throw StructureError("second_eigenvalue: graph must be connected");
  const int n = g.num_vertices();
  if (n == 1) throw StructureError("second_eigenvalue: needs >= 2 vertices");

  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (int v = 0; v < n; ++v) {
      double s = 0;
      for (int w : g.neighbors(v)) s += x[w];
      y[v] = s / t;
    }
  };
  auto project = [&](std::vector<double>& x) {
    double mean = 0;
    for (double xi : x) mean += xi;
    mean /= n;
    for (double& xi : x) xi -= mean;
  };
  auto norm = [&](const std::vector<double>& x) {
    double s = 0;
    for (double xi : x) s += xi * xi;
    return std::sqrt(s);
  };

  Rng rng(0x5eed5eedULL);
  std::vector<double> x(n), y(n);
  for (double& xi : x) xi = rng.uniform_real() - 0.5;
  project(x);
  double nx = norm(x);
  if (nx == 0) x[0] = 1, x[1] = -1, nx = norm(x);
  for (double& xi : x) xi /= nx;

  double lambda = 0;
  for (int iter = 0; iter < 200000; ++iter) {
    apply(x, y);
    project(y);
    apply(y, x);
    project(x);
    double nn = norm(x);
    if (nn < 1e-300) return 0.0;  // spectrum is {1} plus zeros
    for (double& xi : x) xi /= nn;
    // ||Mx|| = sqrt(x^T M^2 x) -> |lambda_2| as x converges
    apply(x, y);
    project(y);
    double rq = 0;
    for (int v = 0; v < n; ++v) rq += y[v] * y[v];
    double next = std::sqrt(rq);
    if (std::abs(next - lambda) < 1e-12) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::max(0.0, lambda);
}

// Random t-regular simple graph on n vertices: stub matching where each step
// draws a uniformly random pair of remaining stubs, with bounded per-step
// retries on conflicts and whole-attempt restarts. Plain pairing-with-
// rejection would almost never terminate for t beyond ~5.
inline SimpleGraph random_regular_graph(int n, int t, Rng& rng,
                                        int max_attempts = 1000) {
  if (t < 0 || t >= n) throw ParameterError("random_regular_graph: need t < n");
  if ((static_cast<long long>(n) * t) % 2 != 0)
    throw ParameterError("random_regular_graph: n*t must be even");
  if (t == n - 1) {  // the complete graph is the only candidate
    SimpleGraph g(n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
    return g;
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<int> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * t);
    for (int v = 0; v < n; ++v)
      for (int i = 0; i < t; ++i) stubs.push_back(v);
    SimpleGraph g(n);
    bool ok = true;
    while (!stubs.empty() && ok) {
      ok = false;
      for (int retry = 0; retry < 200; ++retry) {
        const std::size_t i = rng.below(stubs.size());
        std::size_t j = rng.below(stubs.size() - 1);
        if (j >= i) ++j;
        const int u = stubs[i], v = stubs[j];
        if (u == v || g.has_edge(u, v)) continue;
        g.add_edge(u, v);
        // remove the larger index first so the smaller stays valid
        stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
        stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
        ok = true;
        break;
      }
    }
    if (ok) return g;
  }
  throw ConstructionError("random_regular_graph: stub matching exhausted");
}

}  // namespace cspkit
