#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cspkit/csp.hpp"
#include "cspkit/errors.hpp"
#include "cspkit/rng.hpp"

namespace cspkit {

inline constexpr long long kDefaultBruteCap = 2'000'000;

struct BruteValResult {
  double value = 0.0;
  long long satisfied = 0;  // numerator, for exact comparisons
  Assignment witness;
};

// Exact val(instance) by enumeration over all assignments. The witness is the
// lexicographically smallest optimal assignment.
inline BruteValResult brute_val(const CspInstance& inst,
                                long long cap = kDefaultBruteCap) {
  if (inst.edges.empty()) throw DegenerateError("brute_val on zero-edge instance");
  long long total = 1;
  for (int v = 0; v < inst.n; ++v) {
    total *= inst.alphabet_sizes[v];
    if (total > cap)
      throw SizeLimitError("brute_val: assignment space exceeds cap");
  }
  BruteValResult best;
  Assignment psi(inst.n, 0);
  best.satisfied = -1;
  for (long long it = 0; it < total; ++it) {
    long long sat = 0;
    for (const auto& e : inst.edges)
      if (e.allows(psi[e.u], psi[e.v])) ++sat;
    if (sat > best.satisfied) {
      best.satisfied = sat;
      best.witness = psi;
    }
    // odometer, most significant digit first so witnesses come out in
    // lexicographic order
    for (int v = inst.n - 1; v >= 0; --v) {
      if (++psi[v] < inst.alphabet_sizes[v]) break;
      psi[v] = 0;
    }
  }
  best.value = static_cast<double>(best.satisfied) /
               static_cast<double>(inst.edges.size());
  return best;
}

struct BruteCvalResult {
  int size = 0;
  PartialAssignment witness;
};

// Exact cval(instance): maximum size of a consistent partial assignment.
inline BruteCvalResult brute_cval(const CspInstance& inst,
                                  long long cap = kDefaultBruteCap) {
  long long total = 1;
  for (int v = 0; v < inst.n; ++v) {
    total *= inst.alphabet_sizes[v] + 1;
    if (total > cap)
      throw SizeLimitError("brute_cval: partial assignment space exceeds cap");
  }
  BruteCvalResult best;
  best.size = -1;
  std::vector<int> digit(inst.n, 0);  // 0 = unset, k = label k-1
  PartialAssignment psi(inst.n, kUnsetLabel);
  for (long long it = 0; it < total; ++it) {
    for (int v = 0; v < inst.n; ++v) psi[v] = digit[v] - 1;
    bool ok = true;
    for (const auto& e : inst.edges) {
      if (psi[e.u] == kUnsetLabel || psi[e.v] == kUnsetLabel) continue;
      if (!e.allows(psi[e.u], psi[e.v])) {
        ok = false;
        break;
      }
    }
    if (ok) {
      int sz = partial_size(psi);
      if (sz > best.size) {
        best.size = sz;
        best.witness = psi;
      }
    }
    for (int v = inst.n - 1; v >= 0; --v) {
      if (++digit[v] <= inst.alphabet_sizes[v]) break;
      digit[v] = 0;
    }
  }
  return best;
}

// exp(theta - mu*m) * (mu*m / theta)^theta, the multiplicative upper tail
// bound for a sum of m Bernoulli(<= mu) variables exceeding theta.
inline double chernoff_bound(double mu, long long m, double theta) {
  if (mu <= 0.0 || mu > 1.0) throw ParameterError("chernoff_bound: mu outside (0,1]");
  if (m < 1) throw ParameterError("chernoff_bound: m must be >= 1");
  const double mm = mu * static_cast<double>(m);
  if (theta <= mm) throw ParameterError("chernoff_bound: requires theta > mu*m");
  return std::exp(theta - mm + theta * std::log(mm / theta));
}

namespace detail {

// log of Binom(m, mu) pmf at s, stable for m up to ~1e4
inline double log_binom_pmf(long long m, double mu, long long s) {
  if (mu == 0.0) return s == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (mu == 1.0) return s == m ? 0.0 : -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(m) + 1) -
         std::lgamma(static_cast<double>(s) + 1) -
         std::lgamma(static_cast<double>(m - s) + 1) +
         static_cast<double>(s) * std::log(mu) +
         static_cast<double>(m - s) * std::log1p(-mu);
}

}  // namespace detail

// Exact Pr[S >= theta] for S ~ Binom(m, mu), summed in log space (matches the
// event bounded by the Chernoff inequality).
inline double binom_tail(double mu, long long m, double theta) {
  if (mu < 0.0 || mu > 1.0) throw ParameterError("binom_tail: mu outside [0,1]");
  if (m < 1) throw ParameterError("binom_tail: m must be >= 1");
  const long long first = static_cast<long long>(std::ceil(theta));
  double sum = 0.0;
  for (long long s = std::max<long long>(first, 0); s <= m; ++s)
    sum += std::exp(detail::log_binom_pmf(m, mu, s));
  return std::min(sum, 1.0);
}

enum class ClipMode { Bound, Exact, MonteCarlo };

// E[S - clip_tau(S)] for S ~ Binom(m, mu):
//   Bound      -> (mu*m / (tau - mu*m))^2
//   Exact      -> sum_{s > tau} (s - tau) * pmf(s)
//   MonteCarlo -> empirical mean over `trials` draws
inline double clip_excess(double mu, long long m, long long tau,
                          ClipMode mode = ClipMode::Bound,
                          long long trials = 0, std::uint64_t seed = 0) {
  if (mu <= 0.0 || mu > 1.0) throw ParameterError("clip_excess: mu outside (0,1]");
  if (m < 1) throw ParameterError("clip_excess: m must be >= 1");
  const double mm = mu * static_cast<double>(m);
  if (tau < 1 || static_cast<double>(tau) <= mm)
    throw ParameterError("clip_excess: requires integer tau > mu*m");
  switch (mode) {
    case ClipMode::Bound: {
      const double r = mm / (static_cast<double>(tau) - mm);
      return r * r;
    }
    case ClipMode::Exact: {
      double sum = 0.0;
      for (long long s = tau + 1; s <= m; ++s)
        sum += static_cast<double>(s - tau) *
               std::exp(detail::log_binom_pmf(m, mu, s));
      return sum;
    }
    case ClipMode::MonteCarlo: {
      if (trials < 1) throw ParameterError("clip_excess: trials must be >= 1");
      Rng rng(seed);
      double acc = 0.0;
      for (long long tr = 0; tr < trials; ++tr) {
        long long s = 0;
        for (long long i = 0; i < m; ++i) s += rng.bernoulli(mu) ? 1 : 0;
        if (s > tau) acc += static_cast<double>(s - tau);
      }
      return acc / static_cast<double>(trials);
    }
  }
  throw InternalError("clip_excess: unreachable");
}

// Empirical Pr[S > theta] over `trials` draws of S = sum of m Bernoulli(mu).
inline double monte_carlo_tail(double mu, long long m, double theta,
                               long long trials, std::uint64_t seed) {
  if (trials < 1) throw ParameterError("monte_carlo_tail: trials must be >= 1");
  if (mu < 0.0 || mu > 1.0)
    throw ParameterError("monte_carlo_tail: mu outside [0,1]");
  Rng rng(seed);
  long long hits = 0;
  for (long long tr = 0; tr < trials; ++tr) {
    long long s = 0;
    for (long long i = 0; i < m; ++i) s += rng.bernoulli(mu) ? 1 : 0;
    if (static_cast<double>(s) >= theta) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace cspkit
