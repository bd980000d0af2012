#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cspkit/csp.hpp"
#include "cspkit/errors.hpp"
#include "cspkit/graph.hpp"
#include "cspkit/rng.hpp"

namespace cspkit {

namespace detail {

// Biregular degrees of a bipartite instance, or nullopt.
inline std::optional<std::pair<int, int>> biregular_degrees(
    const CspInstance& inst) {
  if (!inst.bipartition || inst.bipartition->left.empty() ||
      inst.bipartition->right.empty())
    return std::nullopt;
  std::vector<int> deg(inst.n, 0);
  for (const auto& e : inst.edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  const int d1 = deg[inst.bipartition->left.front()];
  const int d2 = deg[inst.bipartition->right.front()];
  for (int a : inst.bipartition->left)
    if (deg[a] != d1) return std::nullopt;
  for (int b : inst.bipartition->right)
    if (deg[b] != d2) return std::nullopt;
  return std::make_pair(d1, d2);
}

}  // namespace detail

// Copy expansion: A' = A x [d1] x [c1], B' = B x [d2] x [c2], every original
// edge fanned out over all index combinations with the relation copied.
// Output is (c2*d1*d2, c1*d1*d2)-biregular and val is preserved exactly.
inline CspInstance copy_expand(const CspInstance& inst, int c1, int c2) {
  if (c1 < 1 || c2 < 1) throw ParameterError("copy_expand: c1, c2 must be >= 1");
  auto dd = detail::biregular_degrees(inst);
  if (!dd) throw ParameterError("copy_expand: input must be bipartite biregular");
  const auto [d1, d2] = *dd;
  const auto& A = inst.bipartition->left;
  const auto& B = inst.bipartition->right;
  const int nA = static_cast<int>(A.size());
  const int nB = static_cast<int>(B.size());
  // position of each original vertex within its side
  std::vector<int> pos(inst.n, -1);
  for (int i = 0; i < nA; ++i) pos[A[i]] = i;
  for (int i = 0; i < nB; ++i) pos[B[i]] = i;

  CspInstance out;
  const int nA2 = nA * d1 * c1;
  const int nB2 = nB * d2 * c2;
  out.n = nA2 + nB2;
  out.alphabet_sizes.resize(out.n);
  out.bipartition = Bipartition{};
  for (int i = 0; i < nA2; ++i) {
    out.alphabet_sizes[i] = inst.alphabet_sizes[A[i / (d1 * c1)]];
    out.bipartition->left.push_back(i);
  }
  for (int i = 0; i < nB2; ++i) {
    out.alphabet_sizes[nA2 + i] = inst.alphabet_sizes[B[i / (d2 * c2)]];
    out.bipartition->right.push_back(nA2 + i);
  }

  std::vector<CspEdge> sorted_edges = inst.edges;
  std::sort(sorted_edges.begin(), sorted_edges.end(),
            [](const CspEdge& a, const CspEdge& b) { return a.id < b.id; });
  int next_id = 0;
  for (const auto& e : sorted_edges)
    for (int i1 = 0; i1 < d1; ++i1)
      for (int j1 = 0; j1 < c1; ++j1)
        for (int i2 = 0; i2 < d2; ++i2)
          for (int j2 = 0; j2 < c2; ++j2) {
            CspEdge ne;
            ne.id = next_id++;
            ne.u = (pos[e.u] * d1 + i1) * c1 + j1;
            ne.v = nA2 + (pos[e.v] * d2 + i2) * c2 + j2;
            ne.allowed = e.allowed;
            out.edges.push_back(std::move(ne));
          }
  out.normalize();
  return out;
}

// Doubling into a bipartite instance: two copies V1, V2 of the vertex set,
// each constraint (u, v) becomes (u1, v2) and (v1, u2) with the relation
// transposed on the second copy. |E| doubles; val can only go up, and at most
// doubles.
inline CspInstance bipartite_double(const CspInstance& inst) {
  CspInstance out;
  out.n = 2 * inst.n;
  out.alphabet_sizes = inst.alphabet_sizes;
  out.alphabet_sizes.insert(out.alphabet_sizes.end(),
                            inst.alphabet_sizes.begin(),
                            inst.alphabet_sizes.end());
  out.bipartition = Bipartition{};
  for (int v = 0; v < inst.n; ++v) out.bipartition->left.push_back(v);
  for (int v = 0; v < inst.n; ++v) out.bipartition->right.push_back(inst.n + v);

  std::vector<CspEdge> sorted_edges = inst.edges;
  std::sort(sorted_edges.begin(), sorted_edges.end(),
            [](const CspEdge& a, const CspEdge& b) { return a.id < b.id; });
  int next_id = 0;
  for (const auto& e : sorted_edges) {
    CspEdge e1;
    e1.id = next_id++;
    e1.u = e.u;
    e1.v = inst.n + e.v;
    e1.allowed = e.allowed;
    out.edges.push_back(std::move(e1));
    CspEdge e2;
    e2.id = next_id++;
    e2.u = e.v;
    e2.v = inst.n + e.u;
    for (const auto& [su, sv] : e.allowed) e2.allowed.emplace_back(sv, su);
    e2.normalize();
    out.edges.push_back(std::move(e2));
  }
  out.normalize();
  return out;
}

// The subsampling parameter ledger. When not overridden the fields follow
//   lambda = 0.001 * min(delta, nu)
//   p      = (1 - lambda) / C
//   d0     = 10000 / lambda^3
//   chi    = 1/(nu - 2*lambda) * (1/dA + t/dB)
//   R0     = max{ (e/chi)^(1/lambda), 100^(1/|1/dA + t/dB - (nu-lambda)*chi|) }
//   n_E    = dA * |A'|
// paper_faithful is true only when dA, dB >= d0; desk-scale runs override
// lambda (and possibly p) and are flagged as such.
struct SubsampleParams {
  double lambda = 0.0;
  double p = 0.0;
  double d0 = 0.0;
  double chi = 0.0;
  double r0 = 0.0;
  long long n_e = 0;
  bool lambda_overridden = false;
  bool p_overridden = false;
  bool paper_faithful = false;
};

inline SubsampleParams subsample_params(
    double delta, double nu, double t, int C, int dA, int dB,
    long long A_size, std::optional<double> override_lambda = std::nullopt,
    std::optional<double> override_p = std::nullopt) {
  if (!(delta > 0.0 && delta < nu && nu <= 1.0))
    throw ParameterError("subsample_params: need 0 < delta < nu <= 1");
  if (!(t > 0.0 && t <= 1.0))
    throw ParameterError("subsample_params: need t in (0,1]");
  if (C < 1) throw ParameterError("subsample_params: need C >= 1");
  if (dA < 1 || dB < 1 || A_size < 1)
    throw ParameterError("subsample_params: degrees and A_size must be >= 1");
  SubsampleParams sp;
  if (override_lambda) {
    sp.lambda = *override_lambda;
    sp.lambda_overridden = true;
    if (!(sp.lambda > 0.0 && sp.lambda < 1.0))
      throw ParameterError("subsample_params: overridden lambda outside (0,1)");
  } else {
    sp.lambda = 0.001 * std::min(delta, nu);
  }
  if (nu <= 2.0 * sp.lambda)
    throw ParameterError("subsample_params: nu <= 2*lambda, chi undefined");
  if (override_p) {
    sp.p = *override_p;
    sp.p_overridden = true;
    if (sp.p < 0.0 || sp.p > 1.0)
      throw ParameterError("subsample_params: overridden p outside [0,1]");
  } else {
    sp.p = (1.0 - sp.lambda) / static_cast<double>(C);
  }
  sp.d0 = 10000.0 / (sp.lambda * sp.lambda * sp.lambda);
  const double inv_deg = 1.0 / dA + t / dB;
  sp.chi = inv_deg / (nu - 2.0 * sp.lambda);
  // As printed the exponent denominator 1/dA + t/dB - (nu-lambda)*chi is
  // negative; the union bound needs its magnitude.
  const double denom = std::abs(inv_deg - (nu - sp.lambda) * sp.chi);
  sp.r0 = std::max(std::pow(std::exp(1.0) / sp.chi, 1.0 / sp.lambda),
                   std::pow(100.0, 1.0 / denom));
  sp.n_e = static_cast<long long>(dA) * A_size;
  sp.paper_faithful = !sp.lambda_overridden && !sp.p_overridden &&
                      dA >= sp.d0 && dB >= sp.d0;
  return sp;
}

// Per-run subsampling diagnostics. event_e1: |E1| in [(1-2*lambda)*n_E, n_E];
// event_e2: removed-for-degree < lambda*|E1|. event_e3 (planted value
// retention) is filled by callers that know the planted assignment.
struct ReductionReport {
  long long kept_edges = 0;
  long long removed_for_degree = 0;
  bool event_e1 = false;
  bool event_e2 = false;
  std::optional<bool> event_e3;
  std::uint64_t seed = 0;
};

// Subsampling degree reduction: keep each edge independently with probability
// p, then trim left vertices above dA and right vertices above dB, removing
// the largest edge ids first. Output is always (dA, dB)-bounded.
inline std::pair<CspInstance, ReductionReport> subsample_reduce(
    const CspInstance& inst, int dA, int dB, const SubsampleParams& params,
    std::uint64_t seed) {
  if (!inst.bipartition)
    throw ParameterError("subsample_reduce: input must be bipartite");
  if (params.p < 0.0 || params.p > 1.0)
    throw ParameterError("subsample_reduce: p outside [0,1]");
  if (dA < 1 || dB < 1)
    throw ParameterError("subsample_reduce: degree bounds must be >= 1");

  std::vector<const CspEdge*> sorted;
  sorted.reserve(inst.edges.size());
  for (const auto& e : inst.edges) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const CspEdge* a, const CspEdge* b) { return a->id < b->id; });

  Rng rng(seed);
  std::vector<const CspEdge*> kept;
  for (const CspEdge* e : sorted)
    if (rng.bernoulli(params.p)) kept.push_back(e);
  const long long e1_size = static_cast<long long>(kept.size());

  // trim: drop the largest ids first, left side then right side
  auto trim = [&](bool left_side, int bound) {
    std::vector<int> deg(inst.n, 0);
    for (const CspEdge* e : kept) ++deg[left_side ? e->u : e->v];
    std::vector<char> drop(kept.size(), 0);
    std::vector<int> over;
    for (int v = 0; v < inst.n; ++v)
      if (deg[v] > bound) over.push_back(v);
    if (!over.empty()) {
      for (std::size_t i = kept.size(); i-- > 0;) {
        const int v = left_side ? kept[i]->u : kept[i]->v;
        if (deg[v] > bound) {
          drop[i] = 1;
          --deg[v];
        }
      }
    }
    std::vector<const CspEdge*> next;
    next.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      if (!drop[i]) next.push_back(kept[i]);
    kept.swap(next);
  };
  trim(true, dA);
  trim(false, dB);

  CspInstance out;
  out.n = inst.n;
  out.alphabet_sizes = inst.alphabet_sizes;
  out.bipartition = inst.bipartition;
  out.edges.reserve(kept.size());
  for (const CspEdge* e : kept) out.edges.push_back(*e);
  out.normalize();

  ReductionReport rep;
  rep.kept_edges = e1_size;
  rep.removed_for_degree = e1_size - static_cast<long long>(kept.size());
  rep.event_e1 =
      static_cast<double>(e1_size) >=
          (1.0 - 2.0 * params.lambda) * static_cast<double>(params.n_e) &&
      e1_size <= params.n_e;
  rep.event_e2 = static_cast<double>(rep.removed_for_degree) <
                 params.lambda * static_cast<double>(e1_size);
  rep.seed = seed;
  return {std::move(out), rep};
}

// FGLSS graph: one vertex per (edge, satisfying pair), edges between
// inconsistent vertices (a shared CSP vertex carrying different labels).
// indep(graph) = val(inst) * |E| and the graph is (dA+dB)-claw-free for
// (dA, dB)-bounded bipartite inputs.
struct FglssVertex {
  int edge_id = 0;
  int label_u = 0;
  int label_v = 0;
};

struct FglssResult {
  SimpleGraph graph;
  std::vector<FglssVertex> vertices;
};

inline FglssResult fglss(const CspInstance& inst) {
  if (inst.edges.empty()) throw DegenerateError("fglss on zero-edge instance");
  std::vector<const CspEdge*> sorted;
  for (const auto& e : inst.edges) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const CspEdge* a, const CspEdge* b) { return a->id < b->id; });

  FglssResult out;
  std::vector<const CspEdge*> vertex_edge;
  for (const CspEdge* e : sorted)
    for (const auto& [su, sv] : e->allowed) {
      out.vertices.push_back({e->id, su, sv});
      vertex_edge.push_back(e);
    }
  const int nv = static_cast<int>(out.vertices.size());
  out.graph = SimpleGraph(nv);
  auto label_at = [&](int i, int csp_vertex) -> int {
    // label the FGLSS vertex i assigns to csp_vertex, or -1 if not incident
    const CspEdge* e = vertex_edge[i];
    if (e->u == csp_vertex) return out.vertices[i].label_u;
    if (e->v == csp_vertex) return out.vertices[i].label_v;
    return -1;
  };
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j) {
      const CspEdge* ej = vertex_edge[j];
      bool inconsistent = false;
      for (int cv : {ej->u, ej->v}) {
        const int li = label_at(i, cv);
        const int lj = label_at(j, cv);
        if (li != -1 && li != lj) {
          inconsistent = true;
          break;
        }
      }
      if (inconsistent) out.graph.add_edge(i, j);
    }
  return out;
}

// Label-extended graph: one vertex per (CSP vertex, label); labels of the
// same CSP vertex form a clique, and labels across a constraint edge are
// adjacent iff the pair violates the relation. indep(graph) = cval(inst) and
// the graph is (d+2)-claw-free for d-bounded inputs.
struct LabelExtResult {
  SimpleGraph graph;
  std::vector<std::pair<int, int>> vertices;  // (csp vertex, label)
};

inline LabelExtResult label_extended(const CspInstance& inst, int d) {
  auto chk = validate_degrees(inst, DegreeSpec::bounded(d));
  if (!chk.ok)
    throw ParameterError("label_extended: constraint graph degree exceeds d");
  LabelExtResult out;
  std::vector<int> base(inst.n, 0);
  int nv = 0;
  for (int v = 0; v < inst.n; ++v) {
    base[v] = nv;
    nv += inst.alphabet_sizes[v];
    for (int s = 0; s < inst.alphabet_sizes[v]; ++s)
      out.vertices.emplace_back(v, s);
  }
  out.graph = SimpleGraph(nv);
  for (int v = 0; v < inst.n; ++v)
    for (int s1 = 0; s1 < inst.alphabet_sizes[v]; ++s1)
      for (int s2 = s1 + 1; s2 < inst.alphabet_sizes[v]; ++s2)
        out.graph.add_edge(base[v] + s1, base[v] + s2);
  for (const auto& e : inst.edges)
    for (int su = 0; su < inst.alphabet_sizes[e.u]; ++su)
      for (int sv = 0; sv < inst.alphabet_sizes[e.v]; ++sv)
        if (!e.allows(su, sv)) out.graph.add_edge(base[e.u] + su, base[e.v] + sv);
  return out;
}

// Degree split with the left/right ratio near sqrt(2), via continued-fraction
// convergents of sqrt(2). dA + dB <= k always.
struct BalancedDegrees {
  long long q1 = 0;
  long long q2 = 0;
  int d_left = 0;
  int d_right = 0;
};

inline BalancedDegrees balance_degrees(int k, double epsilon) {
  const double bound = 1.0 / (3.0 + 2.0 * std::sqrt(2.0));
  if (!(epsilon > 0.0 && epsilon < bound))
    throw ParameterError("balance_degrees: epsilon outside (0, 1/(3+2*sqrt(2)))");
  if (k < 3) throw ParameterError("balance_degrees: k must be >= 3");
  const double tol = 0.01 * epsilon;
  const double rt2 = std::sqrt(2.0);
  long long p = 1, q = 1;  // convergents p/q -> sqrt(2)
  while (q <= 1'000'000) {
    const double r = static_cast<double>(p) / static_cast<double>(q);
    if (std::abs(r - rt2) <= tol && std::abs(1.0 / r - 1.0 / rt2) <= tol) {
      BalancedDegrees out;
      out.q1 = p;
      out.q2 = q;
      out.d_left = static_cast<int>((static_cast<long long>(k) * p) / (p + q));
      out.d_right = static_cast<int>((static_cast<long long>(k) * q) / (p + q));
      return out;
    }
    const long long np = p + 2 * q, nq = p + q;
    p = np;
    q = nq;
  }
  throw ParameterError("balance_degrees: no convergent within search bound");
}

}  // namespace cspkit
