#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cspkit/csp.hpp"
#include "cspkit/errors.hpp"
#include "cspkit/graph.hpp"
#include "cspkit/rng.hpp"

namespace cspkit {

// Wrap-around addition on [R]. The 1-based form follows the defining formula
// (x + y if at most R, else x + y - R); labels cross the csp-core boundary
// 0-based.
inline int oplus1(int x, int y, int R) {
  const int s = x + y;
  return s <= R ? s : s - R;
}

inline int oplus0(int a, int b, int R) {
  return oplus1(a + 1, b + 1, R) - 1;  // == (a + b + 1) mod R
}

// Expander-backed predicate: P = ordered pairs of edges of a t-regular graph
// H on [R]. |P| = t*R, P is symmetric and irreflexive, and both marginals of
// the uniform distribution over P are uniform on [R].
struct PredicateGadget {
  int R = 0;
  int t = 0;
  SimpleGraph H;
  std::vector<std::pair<int, int>> pairs;  // ordered, 0-based, sorted
  double rho = 0.0;                        // measured |lambda_2| of H
};

inline constexpr double kDefaultAcceptConstant = 2.5;

// Samples random t-regular graphs until |lambda_2| <= c_accept / sqrt(t).
inline PredicateGadget build_gadget(int R, int t, std::uint64_t seed,
                                    double c_accept = kDefaultAcceptConstant,
                                    int max_retries = 100) {
  if (t < 1 || t >= R) throw ParameterError("build_gadget: need 1 <= t < R");
  if ((static_cast<long long>(t) * R) % 2 != 0)
    throw ParameterError("build_gadget: t*R must be even");
  const double threshold = c_accept / std::sqrt(static_cast<double>(t));
  Rng base(seed);
  double best_seen = 2.0;
  for (int retry = 0; retry < max_retries; ++retry) {
    Rng rng = base.split(static_cast<std::uint64_t>(retry));
    SimpleGraph h = random_regular_graph(R, t, rng);
    if (!h.is_connected()) continue;
    const double lam = second_eigenvalue(h);
    best_seen = std::min(best_seen, lam);
    if (lam <= threshold) {
      PredicateGadget g;
      g.R = R;
      g.t = t;
      g.rho = lam;
      for (int i = 0; i < R; ++i)
        for (int j : h.neighbors(i)) g.pairs.emplace_back(i, j);
      std::sort(g.pairs.begin(), g.pairs.end());
      g.H = std::move(h);
      return g;
    }
  }
  throw ConstructionError(
      "build_gadget: retries exhausted; best |lambda_2| seen = " +
      std::to_string(best_seen) + ", threshold = " + std::to_string(threshold));
}

// CSP(P) instance over a bipartite pattern graph: relation of edge e is
// {(x, y) : (x (+) s_u, y (+) s_v) in P} for per-endpoint shifts s. Shifts
// are 0-based; empty `shifts` draws them uniformly from the seed.
inline CspInstance instantiate_csp(
    const PredicateGadget& gadget, const SimpleGraph& pattern,
    const Bipartition& bipartition,
    std::vector<std::pair<int, int>> shifts = {}, std::uint64_t seed = 0) {
  const auto edges = pattern.edge_list();
  if (shifts.empty()) {
    Rng rng(seed);
    for (std::size_t i = 0; i < edges.size(); ++i)
      shifts.emplace_back(rng.uniform_int(0, gadget.R - 1),
                          rng.uniform_int(0, gadget.R - 1));
  }
  if (shifts.size() != edges.size())
    throw ParameterError("instantiate_csp: one shift pair per pattern edge");
  for (const auto& [su, sv] : shifts)
    if (su < 0 || su >= gadget.R || sv < 0 || sv >= gadget.R)
      throw ParameterError("instantiate_csp: shift out of range");

  std::vector<int> side(pattern.num_vertices(), -1);
  for (int a : bipartition.left) side[a] = 0;
  for (int b : bipartition.right) side[b] = 1;

  CspInstance inst;
  inst.n = pattern.num_vertices();
  inst.alphabet_sizes.assign(inst.n, gadget.R);
  inst.bipartition = bipartition;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    auto [su, sv] = shifts[i];
    if (side[u] == 1) {
      std::swap(u, v);
      std::swap(su, sv);
    }
    CspEdge e;
    e.id = static_cast<int>(i);
    e.u = u;
    e.v = v;
    for (int x = 0; x < gadget.R; ++x)
      for (int y = 0; y < gadget.R; ++y)
        if (gadget.H.has_edge(oplus0(x, su, gadget.R), oplus0(y, sv, gadget.R)))
          e.allowed.emplace_back(x, y);
    e.normalize();
    inst.edges.push_back(std::move(e));
  }
  inst.normalize();
  inst.validate();
  return inst;
}

// Explicit function [R]^L -> [R]. The table index packs coordinates with
// coordinate 0 most significant.
struct TestFunction {
  int R = 0;
  int L = 0;
  std::vector<int> table;

  int operator()(const std::vector<int>& x) const {
    std::size_t idx = 0;
    for (int i = 0; i < L; ++i)
      idx = idx * static_cast<std::size_t>(R) + static_cast<std::size_t>(x[i]);
    return table[idx];
  }

  bool is_balanced() const {
    std::vector<std::size_t> cnt(R, 0);
    for (int v : table) ++cnt[v];
    const std::size_t want = table.size() / static_cast<std::size_t>(R);
    return std::all_of(cnt.begin(), cnt.end(),
                       [&](std::size_t c) { return c == want; });
  }

  static TestFunction dictator(int R, int L, int coord) {
    if (coord < 0 || coord >= L)
      throw ParameterError("dictator: coordinate out of range");
    TestFunction f{R, L, {}};
    f.table.resize(pow_size(R, L));
    std::vector<int> x(L, 0);
    for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
      f.table[idx] = x[coord];
      bump(x, R);
    }
    return f;
  }

  static TestFunction constant(int R, int L, int value) {
    if (value < 0 || value >= R)
      throw ParameterError("constant: value out of range");
    TestFunction f{R, L, {}};
    f.table.assign(pow_size(R, L), value);
    return f;
  }

  static TestFunction random(int R, int L, Rng& rng) {
    TestFunction f{R, L, {}};
    f.table.resize(pow_size(R, L));
    for (int& v : f.table) v = rng.uniform_int(0, R - 1);
    return f;
  }

  static std::size_t pow_size(int R, int L) {
    std::size_t s = 1;
    for (int i = 0; i < L; ++i) {
      if (s > (std::size_t{1} << 40) / static_cast<std::size_t>(R))
        throw SizeLimitError("function table too large");
      s *= static_cast<std::size_t>(R);
    }
    return s;
  }

  static void bump(std::vector<int>& x, int R) {
    for (int i = static_cast<int>(x.size()) - 1; i >= 0; --i) {
      if (++x[i] < R) break;
      x[i] = 0;
    }
  }
};

enum class AcceptMode { Exact, MonteCarlo };

inline constexpr long long kDefaultExactTestCap = 4'000'000;

// Probability over (x_i, y_i) ~ mu^{(x)L} that (F(x), F(y)) in P, where mu is
// uniform over the ordered pairs of P.
inline double test_accept_prob(const PredicateGadget& gadget,
                               const TestFunction& f,
                               AcceptMode mode = AcceptMode::Exact,
                               long long trials = 0, std::uint64_t seed = 0,
                               long long cap = kDefaultExactTestCap) {
  if (f.R != gadget.R) throw ParameterError("test_accept_prob: R mismatch");
  const std::size_t np = gadget.pairs.size();  // t*R
  std::vector<int> x(f.L), y(f.L);
  if (mode == AcceptMode::Exact) {
    double total = 1;
    for (int i = 0; i < f.L; ++i) total *= static_cast<double>(np);
    if (total > static_cast<double>(cap))
      throw SizeLimitError("test_accept_prob: exact enumeration exceeds cap");
    const long long n_total = static_cast<long long>(total);
    long long accept = 0;
    std::vector<std::size_t> pick(f.L, 0);
    for (long long it = 0; it < n_total; ++it) {
      for (int i = 0; i < f.L; ++i) {
        x[i] = gadget.pairs[pick[i]].first;
        y[i] = gadget.pairs[pick[i]].second;
      }
      if (gadget.H.has_edge(f(x), f(y))) ++accept;
      for (int i = f.L - 1; i >= 0; --i) {
        if (++pick[i] < np) break;
        pick[i] = 0;
      }
    }
    return static_cast<double>(accept) / static_cast<double>(n_total);
  }
  if (trials < 1) throw ParameterError("test_accept_prob: trials must be >= 1");
  Rng rng(seed);
  long long accept = 0;
  for (long long tr = 0; tr < trials; ++tr) {
    for (int i = 0; i < f.L; ++i) {
      const auto& pr = gadget.pairs[rng.below(np)];
      x[i] = pr.first;
      y[i] = pr.second;
    }
    if (gadget.H.has_edge(f(x), f(y))) ++accept;
  }
  return static_cast<double>(accept) / static_cast<double>(trials);
}

// Efron-Stein decomposition of a real table on [R]^L under the uniform
// product measure: f = sum_S f_S with f_S depending only on coordinates S and
// the components mutually orthogonal. Component S is the inclusion-exclusion
// sum over T subseteq S of (-1)^{|S|-|T|} E[f | coordinates T].
struct EfronStein {
  int R = 0;
  int L = 0;
  std::vector<std::vector<double>> components;  // indexed by subset mask
};

inline EfronStein efron_stein(const std::vector<double>& f, int R, int L,
                              long long cap = 1'000'000) {
  const std::size_t sz = TestFunction::pow_size(R, L);
  if (f.size() != sz) throw ParameterError("efron_stein: table size mismatch");
  if (static_cast<long long>(sz) > cap)
    throw SizeLimitError("efron_stein: table exceeds cap");
  const int nmask = 1 << L;
  // strides: coordinate i has stride R^(L-1-i)
  std::vector<std::size_t> stride(L);
  for (int i = 0; i < L; ++i) {
    std::size_t s = 1;
    for (int j = i + 1; j < L; ++j) s *= static_cast<std::size_t>(R);
    stride[i] = s;
  }
  // cond[T](y) = E[f | y_T] as a full table (constant over coordinates not
  // in T); built by averaging out one coordinate at a time
  std::vector<std::vector<double>> cond(nmask);
  cond[nmask - 1] = f;
  for (int mask = nmask - 2; mask >= 0; --mask) {
    // average out the highest coordinate missing from mask but present in a
    // computed supermask
    int missing = -1;
    for (int i = 0; i < L; ++i)
      if (!(mask & (1 << i))) missing = i;
    const int super_mask = mask | (1 << missing);
    const auto& src = cond[super_mask];
    auto& dst = cond[mask];
    dst.assign(sz, 0.0);
    for (std::size_t idx = 0; idx < sz; ++idx) {
      const std::size_t digit = (idx / stride[missing]) % R;
      const std::size_t base = idx - digit * stride[missing];
      if (digit == 0) {
        double avg = 0.0;
        for (int v = 0; v < R; ++v) avg += src[base + v * stride[missing]];
        avg /= R;
        for (int v = 0; v < R; ++v) dst[base + v * stride[missing]] = avg;
      }
    }
  }
  EfronStein out{R, L, std::vector<std::vector<double>>(nmask)};
  for (int s = 0; s < nmask; ++s) {
    out.components[s].assign(sz, 0.0);
    for (int t = s;; t = (t - 1) & s) {
      const int sign = (std::popcount(static_cast<unsigned>(s ^ t)) % 2) ? -1 : 1;
      for (std::size_t idx = 0; idx < sz; ++idx)
        out.components[s][idx] += sign * cond[t][idx];
      if (t == 0) break;
    }
  }
  return out;
}

inline double l2_sq(const std::vector<double>& g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return s / static_cast<double>(g.size());
}

// Inf_i(f) = sum over S containing i of ||f_S||_2^2, optionally restricted to
// |S| <= degree_cap.
inline double influence(const std::vector<double>& f, int R, int L, int coord,
                        int degree_cap = -1) {
  if (coord < 0 || coord >= L)
    throw ParameterError("influence: coordinate out of range");
  auto dec = efron_stein(f, R, L);
  double total = 0.0;
  for (int s = 0; s < (1 << L); ++s) {
    if (!(s & (1 << coord))) continue;
    if (degree_cap >= 0 && std::popcount(static_cast<unsigned>(s)) > degree_cap)
      continue;
    total += l2_sq(dec.components[s]);
  }
  return total;
}

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ParameterError("normal_quantile: p outside (0,1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0));
}

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

template <typename F>
double integrate(F&& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

// Gamma_sigma(a, b) = Pr[g1 <= Phi^-1(a), g2 <= Phi^-1(b)] for
// sigma-correlated standard Gaussians, to absolute error <= 1e-6.
inline double gamma_rho(double sigma, double a, double b) {
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw ParameterError("gamma_rho: sigma outside [0,1)");
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
    throw ParameterError("gamma_rho: a, b outside (0,1)");
  const double za = detail::normal_quantile(a);
  const double zb = detail::normal_quantile(b);
  if (sigma == 0.0) return a * b;
  const double s = std::sqrt(1.0 - sigma * sigma);
  auto integrand = [&](double x) {
    return detail::normal_pdf(x) * detail::normal_cdf((zb - sigma * x) / s);
  };
  return detail::integrate(integrand, za - 41.0, za, 1e-9);
}

}  // namespace cspkit
