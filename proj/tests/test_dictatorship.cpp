#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "cspkit/dictatorship.hpp"
#include "cspkit/oracles.hpp"
#include "testutil.hpp"

using namespace cspkit;

TEST_CASE("wrap-around addition") {
  // 1-based defining formula
  CHECK(oplus1(3, 4, 5) == 2);
  CHECK(oplus1(1, 4, 5) == 5);
  CHECK(oplus1(5, 5, 5) == 5);
  // 0-based boundary form
  for (int R : {2, 5, 8})
    for (int a = 0; a < R; ++a)
      for (int b = 0; b < R; ++b) {
        const int c = oplus0(a, b, R);
        CHECK(c == (a + b + 1) % R);
        CHECK(c >= 0);
        CHECK(c < R);
      }
}

TEST_CASE("build_gadget accepts good expanders and reports rho") {
  auto g = build_gadget(10, 9, 1);  // forced K_10: lambda2 = 1/9
  CHECK(g.rho == Catch::Approx(1.0 / 9).margin(1e-7));
  CHECK(g.pairs.size() == static_cast<std::size_t>(9 * 10));
  // P symmetric, irreflexive
  std::set<std::pair<int, int>> ps(g.pairs.begin(), g.pairs.end());
  for (const auto& [i, j] : g.pairs) {
    CHECK(i != j);
    CHECK(ps.count({j, i}) == 1);
  }
  // marginals of uniform-mu over P are uniform (H regular)
  std::vector<int> cnt(g.R, 0);
  for (const auto& [i, j] : g.pairs) ++cnt[i];
  for (int c : cnt) CHECK(c == g.t);

  CHECK_THROWS_AS(build_gadget(6, 6, 1), ParameterError);   // t >= R
  CHECK_THROWS_AS(build_gadget(5, 3, 1), ParameterError);   // odd t*R
  // impossible threshold exhausts retries
  CHECK_THROWS_AS(build_gadget(8, 3, 1, 0.0001, 3), ConstructionError);
}

TEST_CASE("build_gadget succeeds at the R=64, t=16 design point") {
  auto g = build_gadget(64, 16, 2026);
  CHECK(g.rho <= kDefaultAcceptConstant / std::sqrt(16.0));
  CHECK(g.pairs.size() == static_cast<std::size_t>(64 * 16));
}

TEST_CASE("build_gadget is deterministic given seed") {
  auto a = build_gadget(12, 4, 77);
  auto b = build_gadget(12, 4, 77);
  CHECK(a.pairs == b.pairs);
  CHECK(a.rho == b.rho);
}

TEST_CASE("instantiate_csp with zero shifts reproduces P") {
  auto g = build_gadget(6, 3, 2);
  SimpleGraph pattern(2);
  pattern.add_edge(0, 1);
  Bipartition bp{{0}, {1}};
  auto inst = instantiate_csp(g, pattern, bp, {{g.R - 1, g.R - 1}});
  // shift R-1 is the 0-based identity: x (+) (R-1) = x
  REQUIRE(inst.edges.size() == 1);
  CHECK(inst.edges[0].allowed == g.pairs);
  CHECK(brute_val(inst).value == 1.0);  // nonempty P
}

TEST_CASE("shifts permute the relation, preserving its size") {
  auto g = build_gadget(6, 3, 4);
  SimpleGraph pattern(2);
  pattern.add_edge(0, 1);
  Bipartition bp{{0}, {1}};
  Rng rng(5);
  for (int rep = 0; rep < 8; ++rep) {
    const int su = rng.uniform_int(0, g.R - 1);
    const int sv = rng.uniform_int(0, g.R - 1);
    auto inst = instantiate_csp(g, pattern, bp, {{su, sv}});
    CHECK(inst.edges[0].allowed.size() ==
          static_cast<std::size_t>(g.t * g.R));
  }
  CHECK_THROWS_AS(instantiate_csp(g, pattern, bp, {{g.R, 0}}), ParameterError);
  CHECK_THROWS_AS(instantiate_csp(g, pattern, bp, {{0, 0}, {0, 0}}),
                  ParameterError);
}

TEST_CASE("dictators pass with probability exactly 1, constants fail") {
  auto g = build_gadget(6, 3, 3);
  for (int L : {1, 2})
    for (int coord = 0; coord < L; ++coord) {
      auto f = TestFunction::dictator(g.R, L, coord);
      CHECK(f.is_balanced());
      CHECK(test_accept_prob(g, f) == 1.0);
    }
  for (int c = 0; c < g.R; ++c) {
    auto f = TestFunction::constant(g.R, 2, c);
    CHECK(test_accept_prob(g, f) == 0.0);
  }
}

TEST_CASE("random functions accept at rate about t/R") {
  auto g = build_gadget(8, 3, 6);
  Rng rng(8);
  double total = 0.0;
  const int n_funcs = 1000;
  for (int i = 0; i < n_funcs; ++i) {
    auto f = TestFunction::random(g.R, 1, rng);
    total += test_accept_prob(g, f);
  }
  CHECK(total / n_funcs == Catch::Approx(3.0 / 8.0).margin(0.02));
}

TEST_CASE("Monte Carlo acceptance tracks exact mode") {
  auto g = build_gadget(6, 3, 9);
  auto f = TestFunction::dictator(g.R, 2, 0);
  CHECK(test_accept_prob(g, f, AcceptMode::MonteCarlo, 2000, 1) == 1.0);
  Rng rng(10);
  auto fr = TestFunction::random(g.R, 1, rng);
  const double exact = test_accept_prob(g, fr);
  const double mc = test_accept_prob(g, fr, AcceptMode::MonteCarlo, 100000, 2);
  CHECK(mc == Catch::Approx(exact).margin(0.02));
}

TEST_CASE("efron_stein: constant functions") {
  std::vector<double> f(9, 3.5);  // R=3, L=2
  auto dec = efron_stein(f, 3, 2);
  for (double v : dec.components[0]) CHECK(v == Catch::Approx(3.5));
  for (int s = 1; s < 4; ++s)
    for (double v : dec.components[s]) CHECK(v == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("efron_stein: indicator of x1 = 0 on R=2, L=2") {
  // table index packs coordinate 0 most significant
  std::vector<double> f = {1, 1, 0, 0};
  auto dec = efron_stein(f, 2, 2);
  for (double v : dec.components[0]) CHECK(v == Catch::Approx(0.5));
  // coordinate 0 carries +-1/2; coordinate 1 and the pair carry nothing
  const int m0 = 1 << 0, m1 = 1 << 1;
  for (double v : dec.components[m0]) CHECK(std::abs(v) == Catch::Approx(0.5));
  for (double v : dec.components[m1]) CHECK(v == Catch::Approx(0.0).margin(1e-12));
  for (double v : dec.components[m0 | m1])
    CHECK(v == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("efron_stein: reconstruction, orthogonality, Parseval") {
  Rng rng(12);
  const int R = 3, L = 3;
  std::vector<double> f(27);
  for (double& v : f) v = rng.uniform_real() * 2 - 1;
  auto dec = efron_stein(f, R, L);
  const int nmask = 1 << L;
  // pointwise reconstruction
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    double sum = 0.0;
    for (int s = 0; s < nmask; ++s) sum += dec.components[s][idx];
    CHECK(sum == Catch::Approx(f[idx]).margin(1e-10));
  }
  // orthogonality and Parseval
  double parseval = 0.0;
  for (int s = 0; s < nmask; ++s) {
    parseval += l2_sq(dec.components[s]);
    for (int s2 = s + 1; s2 < nmask; ++s2) {
      double ip = 0.0;
      for (std::size_t idx = 0; idx < f.size(); ++idx)
        ip += dec.components[s][idx] * dec.components[s2][idx];
      CHECK(ip / f.size() == Catch::Approx(0.0).margin(1e-10));
    }
  }
  CHECK(parseval == Catch::Approx(l2_sq(f)).margin(1e-10));
}

TEST_CASE("influences of a dictator indicator") {
  const int R = 4, L = 2;
  // f = indicator[F(x) = 0] for F(x) = x_0
  std::vector<double> f(TestFunction::pow_size(R, L), 0.0);
  auto F = TestFunction::dictator(R, L, 0);
  std::vector<int> x(L, 0);
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    f[idx] = F.table[idx] == 0 ? 1.0 : 0.0;
    TestFunction::bump(x, R);
  }
  CHECK(influence(f, R, L, 0) ==
        Catch::Approx((1.0 / R) * (1.0 - 1.0 / R)).margin(1e-10));
  CHECK(influence(f, R, L, 1) == Catch::Approx(0.0).margin(1e-12));
  CHECK(influence(f, R, L, 0, 0) == 0.0);  // degree cap 0
  CHECK(influence(f, R, L, 0, 1) ==
        Catch::Approx((1.0 / R) * (1.0 - 1.0 / R)).margin(1e-10));
  CHECK_THROWS_AS(influence(f, R, L, 5), ParameterError);
}

TEST_CASE("gamma_rho basics") {
  CHECK(gamma_rho(0.0, 0.3, 0.6) == Catch::Approx(0.18));
  // Gamma_sigma(a, b -> 1) -> a
  for (double sigma : {0.0, 0.3, 0.7})
    CHECK(gamma_rho(sigma, 0.4, 1.0 - 1e-9) == Catch::Approx(0.4).margin(1e-5));
  // symmetric and bounded
  CHECK(gamma_rho(0.5, 0.2, 0.7) == Catch::Approx(gamma_rho(0.5, 0.7, 0.2)).margin(1e-6));
  CHECK(gamma_rho(0.9, 0.25, 0.25) <= 0.25 + 1e-9);
  CHECK_THROWS_AS(gamma_rho(-0.1, 0.5, 0.5), ParameterError);
  CHECK_THROWS_AS(gamma_rho(0.5, 0.0, 0.5), ParameterError);
}

TEST_CASE("gamma_rho monotone in sigma for a = b <= 1/2") {
  for (double a : {0.1, 0.25, 0.5}) {
    double prev = gamma_rho(0.0, a, a);
    for (double sigma : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double cur = gamma_rho(sigma, a, a);
      CHECK(cur >= prev - 1e-7);
      prev = cur;
    }
  }
}

TEST_CASE("KKMO bound on the standard grid") {
  for (double rho : {0.01, 0.02, 0.04})
    for (int R : {4, 16, 64, 256}) {
      const double a = 1.0 / R;
      CHECK(gamma_rho(rho, a, a) <=
            std::pow(a, 2.0 - 2.0 * rho) + 1e-6);
    }
}
