#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cspkit/errors.hpp"
#include "cspkit/rng.hpp"

namespace cspkit {

// One binary constraint. `allowed` is the explicit set of satisfying ordered
// label pairs, kept sorted so membership is a binary search and serialization
// is canonical.
struct CspEdge {
  int id = 0;
  int u = 0;
  int v = 0;
  std::vector<std::pair<int, int>> allowed;

  bool allows(int su, int sv) const {
    return std::binary_search(allowed.begin(), allowed.end(),
                              std::make_pair(su, sv));
  }

  void normalize() {
    std::sort(allowed.begin(), allowed.end());
    allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
  }

  bool operator==(const CspEdge&) const = default;
};

struct Bipartition {
  std::vector<int> left;   // A
  std::vector<int> right;  // B

  bool operator==(const Bipartition&) const = default;
};

// A 2-CSP instance: constraint graph, per-vertex alphabet sizes, and explicit
// relations. Labels are 0-based ranges [0, alphabet_sizes[v]). Parallel edges
// are permitted and distinguished by id.
struct CspInstance {
  int n = 0;
  std::vector<int> alphabet_sizes;
  std::vector<CspEdge> edges;
  std::optional<Bipartition> bipartition;

  void normalize() {
    for (auto& e : edges) e.normalize();
    std::sort(edges.begin(), edges.end(),
              [](const CspEdge& a, const CspEdge& b) { return a.id < b.id; });
    if (bipartition) {
      std::sort(bipartition->left.begin(), bipartition->left.end());
      std::sort(bipartition->right.begin(), bipartition->right.end());
    }
  }

  // Throws ValidationError on any broken invariant.
  void validate() const {
    if (n < 0) throw ValidationError("negative vertex count");
    if (static_cast<int>(alphabet_sizes.size()) != n)
      throw ValidationError("alphabet_sizes length != n");
    for (int v = 0; v < n; ++v)
      if (alphabet_sizes[v] <= 0)
        throw ValidationError("alphabet size must be positive at vertex " +
                              std::to_string(v));
    std::vector<int> ids;
    ids.reserve(edges.size());
    for (const auto& e : edges) {
      if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
        throw ValidationError("edge " + std::to_string(e.id) +
                              " endpoint out of range");
      if (e.u == e.v)
        throw ValidationError("edge " + std::to_string(e.id) + " is a loop");
      for (const auto& [su, sv] : e.allowed)
        if (su < 0 || su >= alphabet_sizes[e.u] || sv < 0 ||
            sv >= alphabet_sizes[e.v])
          throw ValidationError("edge " + std::to_string(e.id) +
                                " allowed pair outside alphabets");
      ids.push_back(e.id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw ValidationError("duplicate edge id");
    if (bipartition) {
      std::vector<int> side(n, -1);
      for (int a : bipartition->left) {
        if (a < 0 || a >= n || side[a] != -1)
          throw ValidationError("bipartition left side malformed");
        side[a] = 0;
      }
      for (int b : bipartition->right) {
        if (b < 0 || b >= n || side[b] != -1)
          throw ValidationError("bipartition right side malformed");
        side[b] = 1;
      }
      for (int v = 0; v < n; ++v)
        if (side[v] == -1)
          throw ValidationError("vertex " + std::to_string(v) +
                                " in neither side of bipartition");
      for (const auto& e : edges)
        if (side[e.u] != 0 || side[e.v] != 1)
          throw ValidationError("edge " + std::to_string(e.id) +
                                " does not cross A->B");
    }
  }

  // Side lookup for bipartite instances: 0 = left, 1 = right.
  std::vector<int> side_of() const {
    std::vector<int> side(n, -1);
    if (bipartition) {
      for (int a : bipartition->left) side[a] = 0;
      for (int b : bipartition->right) side[b] = 1;
    }
    return side;
  }

  bool operator==(const CspInstance&) const = default;
};

// Total assignment: labels[v] in [0, alphabet_sizes[v]).
using Assignment = std::vector<int>;

// Partial assignment: kUnsetLabel marks an unset vertex.
inline constexpr int kUnsetLabel = -1;
using PartialAssignment = std::vector<int>;

inline int partial_size(const PartialAssignment& psi) {
  return static_cast<int>(
      std::count_if(psi.begin(), psi.end(),
                    [](int x) { return x != kUnsetLabel; }));
}

struct DegreeProfile {
  int max_degree = 0;
  std::vector<int> left_degrees;   // bipartite instances only
  std::vector<int> right_degrees;
};

inline void check_assignment(const CspInstance& inst, const Assignment& psi) {
  if (static_cast<int>(psi.size()) != inst.n)
    throw ValidationError("assignment length != n");
  for (int v = 0; v < inst.n; ++v)
    if (psi[v] < 0 || psi[v] >= inst.alphabet_sizes[v])
      throw ValidationError("label out of alphabet at vertex " +
                            std::to_string(v));
}

inline void check_partial_assignment(const CspInstance& inst,
                                     const PartialAssignment& psi) {
  if (static_cast<int>(psi.size()) != inst.n)
    throw ValidationError("partial assignment length != n");
  for (int v = 0; v < inst.n; ++v)
    if (psi[v] != kUnsetLabel &&
        (psi[v] < 0 || psi[v] >= inst.alphabet_sizes[v]))
      throw ValidationError("label out of alphabet at vertex " +
                            std::to_string(v));
}

// Fraction of satisfied edges; parallel edges count separately.
inline double eval_assignment(const CspInstance& inst, const Assignment& psi) {
  if (inst.edges.empty())
    throw DegenerateError("eval_assignment on zero-edge instance");
  check_assignment(inst, psi);
  std::size_t sat = 0;
  for (const auto& e : inst.edges)
    if (e.allows(psi[e.u], psi[e.v])) ++sat;
  return static_cast<double>(sat) / static_cast<double>(inst.edges.size());
}

inline bool partial_consistent(const CspInstance& inst,
                               const PartialAssignment& psi) {
  check_partial_assignment(inst, psi);
  for (const auto& e : inst.edges) {
    if (psi[e.u] == kUnsetLabel || psi[e.v] == kUnsetLabel) continue;
    if (!e.allows(psi[e.u], psi[e.v])) return false;
  }
  return true;
}

struct DegreeSpec {
  enum class Kind { Bounded, BoundedBipartite, Biregular };
  Kind kind;
  int d = 0;        // Bounded
  int d_left = 0;   // bipartite modes
  int d_right = 0;

  static DegreeSpec bounded(int d) { return {Kind::Bounded, d, 0, 0}; }
  static DegreeSpec bounded_bipartite(int dA, int dB) {
    return {Kind::BoundedBipartite, 0, dA, dB};
  }
  static DegreeSpec biregular(int d1, int d2) {
    return {Kind::Biregular, 0, d1, d2};
  }
};

struct DegreeCheck {
  bool ok = false;
  DegreeProfile profile;
};

inline DegreeCheck validate_degrees(const CspInstance& inst,
                                    const DegreeSpec& spec) {
  std::vector<int> deg(inst.n, 0);
  for (const auto& e : inst.edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  DegreeCheck out;
  out.profile.max_degree =
      inst.n == 0 ? 0 : *std::max_element(deg.begin(), deg.end());
  if (spec.kind == DegreeSpec::Kind::Bounded) {
    out.ok = out.profile.max_degree <= spec.d;
    return out;
  }
  if (!inst.bipartition)
    throw ParameterError("bipartite degree mode requires a bipartition");
  for (int a : inst.bipartition->left) out.profile.left_degrees.push_back(deg[a]);
  for (int b : inst.bipartition->right)
    out.profile.right_degrees.push_back(deg[b]);
  auto all_le = [](const std::vector<int>& v, int bound) {
    return std::all_of(v.begin(), v.end(), [&](int x) { return x <= bound; });
  };
  auto all_eq = [](const std::vector<int>& v, int want) {
    return std::all_of(v.begin(), v.end(), [&](int x) { return x == want; });
  };
  if (spec.kind == DegreeSpec::Kind::BoundedBipartite)
    out.ok = all_le(out.profile.left_degrees, spec.d_left) &&
             all_le(out.profile.right_degrees, spec.d_right);
  else
    out.ok = all_eq(out.profile.left_degrees, spec.d_left) &&
             all_eq(out.profile.right_degrees, spec.d_right);
  return out;
}

struct PlantedInstance {
  CspInstance inst;
  Assignment planted;
};

// Random (d1, d2)-biregular bipartite instance with a hidden assignment.
// Edges come from a random stub matching, so parallel edges can occur. Each
// edge's relation contains the planted pair with probability 1 - noise and
// every other pair independently with probability kExtraPairProb.
inline constexpr double kExtraPairProb = 0.2;

inline PlantedInstance gen_planted(int nA, int nB, int d1, int d2, int R_left,
                                   int R_right, double noise,
                                   std::uint64_t seed) {
  if (nA <= 0 || nB <= 0 || d1 <= 0 || d2 <= 0)
    throw ParameterError("gen_planted: counts and degrees must be positive");
  if (static_cast<long long>(nA) * d1 != static_cast<long long>(nB) * d2)
    throw ParameterError("gen_planted: nA*d1 != nB*d2, biregularity infeasible");
  if (R_left <= 0 || R_right <= 0)
    throw ParameterError("gen_planted: alphabet sizes must be positive");
  if (noise < 0.0 || noise > 1.0)
    throw ParameterError("gen_planted: noise outside [0,1]");

  Rng rng(seed);
  PlantedInstance out;
  CspInstance& inst = out.inst;
  inst.n = nA + nB;
  inst.alphabet_sizes.assign(nA, R_left);
  inst.alphabet_sizes.insert(inst.alphabet_sizes.end(), nB, R_right);
  inst.bipartition = Bipartition{};
  for (int a = 0; a < nA; ++a) inst.bipartition->left.push_back(a);
  for (int b = 0; b < nB; ++b) inst.bipartition->right.push_back(nA + b);

  out.planted.resize(inst.n);
  for (int a = 0; a < nA; ++a) out.planted[a] = rng.uniform_int(0, R_left - 1);
  for (int b = 0; b < nB; ++b)
    out.planted[nA + b] = rng.uniform_int(0, R_right - 1);

  // Configuration model: match left stubs to a random permutation of right
  // stubs.
  std::vector<int> right_stubs;
  right_stubs.reserve(static_cast<std::size_t>(nB) * d2);
  for (int b = 0; b < nB; ++b)
    for (int i = 0; i < d2; ++i) right_stubs.push_back(nA + b);
  rng.shuffle(right_stubs);

  int next_id = 0;
  for (int a = 0; a < nA; ++a) {
    for (int i = 0; i < d1; ++i) {
      CspEdge e;
      e.id = next_id++;
      e.u = a;
      e.v = right_stubs[static_cast<std::size_t>(a) * d1 + i];
      const int pu = out.planted[e.u];
      const int pv = out.planted[e.v];
      for (int su = 0; su < R_left; ++su)
        for (int sv = 0; sv < R_right; ++sv) {
          if (su == pu && sv == pv) {
            if (!rng.bernoulli(noise)) e.allowed.emplace_back(su, sv);
          } else if (rng.bernoulli(kExtraPairProb)) {
            e.allowed.emplace_back(su, sv);
          }
        }
      e.normalize();
      inst.edges.push_back(std::move(e));
    }
  }
  inst.normalize();
  return out;
}

}  // namespace cspkit
