#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rieszflow/diagnostics.hpp"
#include "rieszflow/dynamics.hpp"
#include "rieszflow/oracle.hpp"

using namespace rieszflow;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> lattice(int n) {
  std::vector<double> x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = static_cast<double>(i) / n;
  return x;
}

// Sorted points on [0, 1] with both endpoints pinned.
std::vector<double> pinned_random(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(n + 1);
  x[0] = 0.0;
  x[n] = 1.0;
  for (int i = 1; i < n; ++i) x[i] = unit_uniform(rng());
  std::sort(x.begin() + 1, x.end() - 1);
  return x;
}

double max_rel_spread(const std::vector<double>& P, int lo, int hi) {
  double mn = P[lo], mx = P[lo];
  for (int k = lo; k < hi; ++k) {
    mn = std::min(mn, P[k]);
    mx = std::max(mx, P[k]);
  }
  return (mx - mn) / mn;
}

}  // namespace

TEST_CASE("closest_pair") {
  const ClosestPair u = closest_pair(uniform_configuration(10));
  CHECK(u.delta == doctest::Approx(0.1));
  CHECK(u.rho_M == doctest::Approx(1.0));
  CHECK(u.i_M == 0);

  const ClosestPair a = closest_pair(Configuration({0.0, 0.1, 0.5, 0.8}));
  CHECK(a.delta == doctest::Approx(0.1));
  CHECK(a.rho_M == doctest::Approx(2.5));
  CHECK(a.i_M == 0);

  const ClosestPair b = closest_pair(Configuration({0.0, 0.45, 0.55}));
  CHECK(b.delta == doctest::Approx(0.1));
  CHECK(b.i_M == 1);

  // wrap gap can be the closest one
  CHECK(closest_pair(Configuration({0.02, 0.5, 0.97})).i_M == 2);
}

TEST_CASE("cut_profile on the quarter lattice") {
  const CutProfile p = cut_profile(lattice(4), 2.0);
  REQUIRE(p.P.size() == 4);
  CHECK(p.P[1] == doctest::Approx(2315.0 / 27.0).epsilon(1e-14));
  CHECK(p.P[0] == p.P[3]);
  CHECK(p.P[1] == p.P[2]);
  CHECK(p.argmin == 0);
  CHECK(p.argmax == 1);
}

TEST_CASE("cut_profile with two points") {
  const std::vector<double> x{0.2, 0.45};
  const CutProfile p = cut_profile(x, 3.0);
  REQUIRE(p.P.size() == 1);
  CHECK(p.P[0] == doctest::Approx(std::pow(0.25, -4.0)).epsilon(1e-14));
}

TEST_CASE("cut_profile rejects unsorted points") {
  CHECK_THROWS_AS(cut_profile(std::vector<double>{0.0, 0.5, 0.4}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(cut_profile(std::vector<double>{0.0}, 2.0), std::invalid_argument);
}

TEST_CASE("interior cuts of a large lattice approach zeta(s) N^{s+1}") {
  const double s = 2.0;
  double prev = 1e300;
  for (int n : {50, 200, 800}) {
    const CutProfile p = cut_profile(lattice(n), s);
    const double ratio = p.P[n / 2] / (zeta(s).zeta * std::pow(n, s + 1));
    CHECK(ratio < 1.0);
    CHECK(1.0 - ratio < prev);
    prev = 1.0 - ratio;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("cut_profile matches the brute force on random sets") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto x = pinned_random(40, seed);
    for (double s : {1.5, 2.0, 3.0}) {
      const CutProfile fast = cut_profile(x, s);
      const CutProfile slow = exhaustive_cut_check(x, s);
      for (std::size_t k = 0; k < fast.P.size(); ++k) {
        CHECK(fast.P[k] > 0.0);
        CHECK(std::abs(fast.P[k] - slow.P[k]) <= 1e-10 * slow.P[k]);
      }
    }
  }
}

TEST_CASE("weak_cut on equally spaced points") {
  const WeakCut w = weak_cut(lattice(200), 2.0, 0.01);
  CHECK(w.index >= 0);
  CHECK(w.ratio <= 1.01);
  CHECK(w.bound_holds);
  CHECK(w.epsilon1 == doctest::Approx(0.01 / 9.0));
  CHECK(w.warnings.empty());
}

TEST_CASE("weak_cut avoids a dense cluster") {
  const int n = 200;
  std::vector<double> x(n + 1);
  for (int i = 0; i <= n / 2; ++i) x[i] = 0.1 * i / (n / 2);
  for (int i = n / 2 + 1; i <= n; ++i) x[i] = 0.1 + 0.9 * (i - n / 2) / (n / 2.0);
  const WeakCut w = weak_cut(x, 2.0, 0.05);
  REQUIRE(w.index >= 0);
  CHECK(x[w.index] >= 0.1);
  const CutProfile brute = exhaustive_cut_check(x, 2.0);
  CHECK(w.P == doctest::Approx(brute.P[w.index]).epsilon(1e-10));
}

TEST_CASE("weak_cut on pinned random sets") {
  int holds = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) holds += weak_cut(pinned_random(200, 1000 + t), 2.0, 0.05).bound_holds;
  CHECK(holds >= 19);
}

TEST_CASE("weak_cut input contract") {
  CHECK_THROWS_AS(weak_cut(std::vector<double>{0.1, 0.5, 1.0}, 2.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(weak_cut(lattice(10), 2.0, 0.0), std::invalid_argument);
  const WeakCut two = weak_cut(std::vector<double>{0.0, 1.0}, 2.0, 0.1);
  CHECK(two.index == 0);
  CHECK(two.P == doctest::Approx(1.0));
}

TEST_CASE("equalize_cuts with one free point lands on the midpoint") {
  const EqualizedCuts e = equalize_cuts(std::vector<double>{0.0, 0.3, 1.0}, 0, 2, 2.0);
  CHECK(e.points[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e.spread < 1e-10);
}

TEST_CASE("equalize_cuts certificates") {
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6;
    auto x = pinned_random(n, 500 + trial);
    for (double s : {2.0, 1.5, 3.0}) {
      const EqualizedCuts e = equalize_cuts(x, 0, n, s);
      CHECK(max_rel_spread(e.P, 0, n) < 1e-8);
      const CutProfile brute = exhaustive_cut_check(e.points, s);
      for (int k = 0; k < n; ++k) CHECK(std::abs(brute.P[k] - e.P[k]) <= 1e-10 * brute.P[k]);
      CHECK(std::abs(e.identity_rhs - e.min_P) <= 1e-8 * e.min_P);
    }
  }
}

TEST_CASE("equalize_cuts keeps outer points fixed") {
  const auto x = pinned_random(11, 9);
  const EqualizedCuts e = equalize_cuts(x, 3, 8, 2.0);
  for (int i = 0; i <= 3; ++i) CHECK(e.points[i] == x[i]);
  for (int i = 8; i <= 11; ++i) CHECK(e.points[i] == x[i]);
  CHECK(max_rel_spread(e.P, 3, 8) < 1e-8);
  for (int i = 0; i < 11; ++i) CHECK(e.points[i] < e.points[i + 1]);
}

TEST_CASE("equalize_cuts is symmetric under reflection") {
  const std::vector<double> x{0.0, 0.1, 0.15, 0.6, 0.9, 1.0};
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = 1.0 - x[x.size() - 1 - i];
  const EqualizedCuts a = equalize_cuts(x, 0, 5, 2.0);
  const EqualizedCuts b = equalize_cuts(r, 0, 5, 2.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(a.points[i] == doctest::Approx(1.0 - b.points[x.size() - 1 - i]).epsilon(1e-10));
}

TEST_CASE("equalized point maximizes the weakest cut") {
  const int n = 8;
  const auto x = pinned_random(n, 77);
  const EqualizedCuts e = equalize_cuts(x, 0, n, 2.0);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> y = e.points;
    for (int i = 1; i < n; ++i) {
      const double room = std::min(y[i] - y[i - 1], e.points[i + 1] - e.points[i]);
      y[i] += 0.3 * room * (unit_uniform(rng()) - 0.5);
    }
    const CutProfile p = cut_profile(y, 2.0);
    CHECK(*std::min_element(p.P.begin(), p.P.end()) <= e.min_P * (1 + 1e-12));
  }
}

TEST_CASE("bound values") {
  CHECK(mad_bound(2.0, 100, 0.01) == doctest::Approx(2 * std::sqrt(kPi * kPi / 18) * 0.1 / 100).epsilon(1e-12));
  CHECK(mad_bound(2.0, 100, 0.01) == doctest::Approx(1.4810e-3).epsilon(1e-4));
  CHECK(discrepancy_bound(2.0, 0.5, 0.02) == doctest::Approx(0.090690).epsilon(1e-5));
  CHECK(n_star(3.0, 100) == 1.0);
  CHECK(n_star(2.0, 100) == doctest::Approx(std::log(100.0)));
  CHECK(n_star(1.5, 100) == doctest::Approx(10.0));
}

TEST_CASE("uniform configurations have no deviation") {
  const int n = 40;
  const Configuration z = uniform_configuration(n);
  CHECK(gap_mad(z) == 0.0);
  for (double a : {0.0, 0.25, 0.5, 0.975}) {
    for (double L : {0.1, 0.25, 0.5, 0.75}) CHECK(discrepancy(z, a, L) == 0.0);
  }
}

TEST_CASE("discrepancy counts whole intervals") {
  const Configuration z({0.0, 0.1, 0.2, 0.7});
  CHECK(discrepancy(z, 0.0, 0.25) == doctest::Approx(2.0 / 4 - 0.25));
  CHECK(discrepancy(z, 0.65, 0.4) == doctest::Approx(1.0 / 4 - 0.4));  // [0.7, 1.0) only
  CHECK(discrepancy(z, 0.6, 0.6) == doctest::Approx(3.0 / 4 - 0.6));   // wraps onto [0, 0.2)
}

TEST_CASE("distribution report invariants") {
  const Curve c = build_curve(CurveSpec::ellipse(2.0, 1.0));
  const std::vector<Window> windows{{0.0, 0.1}, {0.3, 0.25}, {0.8, 0.5}};
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const int n = 64;
    const Configuration z = seed % 2 ? random_configuration(n, seed) : jittered_configuration(n, seed, 0.6);
    const DistributionReport r = distribution_report(c, RieszParams{2.0, n}, z, 0.05, windows);
    CHECK(r.delta <= 1.0 / n);
    CHECK(1.0 / n <= r.max_gap);
    CHECK(r.rho_M >= 1.0);
    CHECK(r.mad >= 0.0);
    CHECK(r.lyapunov == doctest::Approx(r.E + std::pow(r.rho_M, 2.0)));
    CHECK(r.epsilon_flat >= 0.0);
    CHECK(r.E_flat <= r.E);
    for (const WindowReport& w : r.windows) CHECK(std::abs(w.value) <= std::max(w.L, 1 - w.L));
  }
  CHECK_THROWS_AS(distribution_report(c, RieszParams{2.0, 8}, uniform_configuration(8), 0.05,
                                      std::vector<Window>{{0.0, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("small flat energy implies the deviation bounds") {
  const Curve c = build_curve(CurveSpec::circle());
  const std::vector<Window> windows{{0.0, 0.1}, {0.2, 0.25}, {0.5, 0.5}};
  for (double s : {1.5, 2.0, 3.0}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Configuration z = jittered_configuration(512, seed, 0.3);
      const DistributionReport r = distribution_report(c, RieszParams{s, 512}, z, 0.01, windows);
      CHECK(r.mad_within_flat);
      for (const WindowReport& w : r.windows) CHECK(w.within_flat);
    }
  }
}
