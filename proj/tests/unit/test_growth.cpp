#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "doctest.h"
#include "nodalab/errors.hpp"
#include "nodalab/growth.hpp"
#include "support.hpp"

using namespace nodalab;
using std::numbers::pi;

namespace {

ScalarField constant(const Grid& g, double c) {
  return ScalarField::sample(g, [c](const Point2&) { return c; });
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("doubling index examples") {
  const Grid g = test::square(1.0, 257);
  CHECK(doubling_index(constant(g, -4.0), Point2(0.1, 0.1), 0.2).N == 0.0);
  const auto r3 = doubling_index(test::real_power(g, 3), Point2::Zero(), 0.2);
  CHECK(r3.N == doctest::Approx(3.0).epsilon(0.01));
  CHECK(r3.sup_outer / r3.sup_inner == doctest::Approx(std::exp2(r3.N)).epsilon(1e-12));

  const Grid fine = test::square(1.0, 512);
  for (int n : {2, 6, 10}) {
    const auto u = ScalarField::sample(fine, [n](const Point2& p) { return std::pow(p.x(), n); });
    CHECK(doubling_index(u, Point2::Zero(), 0.25).N == doctest::Approx(n).epsilon(0.01));
  }

  CHECK_THROWS_AS(doubling_index(test::real_power(g, 3), Point2::Zero(), 0.01), InvalidArgument);
  CHECK_THROWS_AS(doubling_index(test::real_power(g, 3), Point2(0.8, 0), 0.2), OutOfDomain);
  CHECK_THROWS_AS(doubling_index(constant(g, 0.0), Point2::Zero(), 0.2), DegenerateInput);
}

TEST_CASE("doubling index is nonnegative") {
  const Grid g = test::square(1.0, 129);
  const auto u = ScalarField::sample(g, [](const Point2& p) {
    return std::cos(6 * p.x() + 1) * std::exp(p.y()) + test::re_power(p, 4);
  });
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = doubling_index(u, Point2(U(rng), U(rng)), 0.07 + 0.2 * std::abs(U(rng)));
    CHECK(r.N >= 0.0);
    CHECK(r.sup_outer >= r.sup_inner);
  }
}

TEST_CASE("uniform doubling index") {
  const Grid g = test::square(2.0, 257);
  const Cube<2> Q{Point2::Zero(), 0.5};
  for (int k : {2, 4, 7}) {
    const auto rep = uniform_doubling_index(test::real_power(g, k), Q);
    CHECK(rep.N == doctest::Approx(k).epsilon(0.02));
    CHECK(rep.admissible > 0);
    CHECK(Q.contains(rep.argmax_center, 1e-12));
  }

  // Monotone under inclusion, up to the sampling slack.
  const auto u = test::real_power(g, 5);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const CubeLattice coarse{5, 8, true};
  for (int trial = 0; trial < 10; ++trial) {
    const double side = 0.3 + 0.4 * U(rng);
    const Cube<2> big{Point2(0.6 * (U(rng) - 0.5), 0.6 * (U(rng) - 0.5)), side};
    const double small = side * (0.3 + 0.6 * U(rng));
    const double slack = 0.5 * (side - small);
    const Cube<2> q{big.center + slack * Point2(2 * U(rng) - 1, 2 * U(rng) - 1), small};
    CHECK(uniform_doubling_index(u, q, coarse).N <= uniform_doubling_index(u, big, coarse).N + 0.05);
  }

  // Four overlapping larger cubes covering Q: one of them has N at least N(Q).
  const Cube<2> Q0{Point2(0.05, -0.1), 0.4};
  const double NQ = uniform_doubling_index(u, Q0, coarse).N;
  double best = 0;
  for (const Point2& shift : {Point2(-1, -1), Point2(-1, 1), Point2(1, -1), Point2(1, 1)}) {
    best = std::max(best, uniform_doubling_index(u, Cube<2>{Q0.center + 0.1 * shift, 0.6}, coarse).N);
  }
  CHECK(best >= NQ - 0.05);
}

TEST_CASE("frequency profile") {
  const Grid g = test::square(1.0, 512);
  const auto K = CoefficientSet::laplace(g);
  for (int k = 1; k <= 6; ++k) {
    const auto p = frequency_profile(test::real_power(g, k), K, Point2::Zero(), 0.1, 0.4, 7);
    CHECK(p.harmonic);
    for (std::size_t s = 0; s < p.r.size(); ++s) {
      CHECK(p.beta[s] == doctest::Approx(k).epsilon(0.02));
      CHECK(std::abs(p.beta[s] - p.r[s] * p.I[s] / p.H[s]) <= 1e-12 * std::abs(p.beta[s]));
      CHECK(p.H[s] > 0.0);
      if (s > 0) CHECK(p.r[s] > p.r[s - 1]);
    }
    const auto mono = check_almost_monotonicity(p);
    CHECK(mono.max_violation <= 5e-3);
  }

  const auto flat = frequency_profile(constant(g, 1.0), K, Point2::Zero(), 0.1, 0.4, 5);
  for (double b : flat.beta) CHECK(std::abs(b) <= 1e-3);
  CHECK(check_almost_monotonicity(flat).max_violation <= 1e-3);

  // c = eps adds eps * int u^2 / H = eps r^2 / 6 to beta of Re z^2.
  const double eps = 0.01;
  const auto Kc = CoefficientSet::from_functions(
      g, [](const Point2&) { return Eigen::Matrix2d::Identity(); },
      [](const Point2&) { return Point2::Zero(); }, [eps](const Point2&) { return eps; });
  const auto u2 = test::real_power(g, 2);
  const auto base = frequency_profile(u2, K, Point2::Zero(), 0.1, 0.4, 4);
  const auto pert = frequency_profile(u2, Kc, Point2::Zero(), 0.1, 0.4, 4);
  CHECK_FALSE(pert.harmonic);
  for (std::size_t s = 0; s < base.r.size(); ++s) {
    const double shift = eps * base.r[s] * base.r[s] / 6.0;
    CHECK(pert.beta[s] - base.beta[s] == doctest::Approx(shift).epsilon(0.01));
  }

  CHECK_THROWS_AS(frequency_profile(constant(g, 0.0), K, Point2::Zero(), 0.1, 0.4, 4),
                  DegenerateInput);
  CHECK_THROWS_AS(frequency_profile(u2, K, Point2::Zero(), 0.4, 0.1, 4), InvalidArgument);
}

TEST_CASE("H growth") {
  const Grid g = test::square(1.0, 512);
  const auto K = CoefficientSet::laplace(g);
  for (int k : {1, 3, 5}) {
    const auto p = frequency_profile(test::real_power(g, k), K, Point2::Zero(), 0.1, 0.4, 13);
    const auto rep = check_H_growth(p, p.r.front(), p.r.back());
    CHECK(rep.ratio == doctest::Approx(std::pow(4.0, 2 * k + 1)).epsilon(0.02));
    CHECK(rep.identity_rel_error <= 0.02);
    CHECK(rep.max_h_over_r_drop <= 1e-3);
    CHECK(rep.growth_exponent == doctest::Approx(2 * k + 1).epsilon(0.01));
  }
  const auto flat = frequency_profile(constant(g, 2.0), K, Point2::Zero(), 0.1, 0.4, 5);
  CHECK(check_H_growth(flat, 0.1, 0.4).ratio == doctest::Approx(4.0).epsilon(1e-3));
  CHECK_THROWS_AS(check_H_growth(flat, 0.4, 0.1), InvalidArgument);
}

TEST_CASE("doubling sandwich") {
  const Grid g = test::square(1.0, 512);
  const auto rep = check_doubling_sandwich(test::real_power(g, 3), Point2::Zero(), 0.05, 4.0, 0.05, 0.0);
  CHECK(rep.ratio == doctest::Approx(64.0).epsilon(0.02));
  CHECK(rep.satisfied);
  const auto flat = check_doubling_sandwich(constant(g, 1.0), Point2::Zero(), 0.05, 4.0, 0.05, 0.0);
  CHECK(flat.ratio == 1.0);
  CHECK(flat.N_rho == 0.0);
  CHECK(flat.satisfied);
  CHECK_THROWS_AS(check_doubling_sandwich(constant(g, 1.0), Point2::Zero(), 0.05, 2.0, 0.05, 0.0),
                  InvalidArgument);
}

TEST_CASE("nearby comparison") {
  const Grid g = test::square(1.0, 257);
  const auto u6 = test::real_power(g, 6);
  const auto same = compare_nearby(u6, Point2(0.1, 0.05), Point2(0.1, 0.05), 0.1, 2.0);
  CHECK(same.N1 > 0.0);
  CHECK(same.holds);
  // Homogeneity oracle: N2 = 6 log2(0.62 / 0.32), short of 0.99 * 6.
  const auto off = compare_nearby(u6, Point2::Zero(), Point2(0.02, 0.0), 0.1, 3.0);
  CHECK(off.N1 == doctest::Approx(6.0).epsilon(0.01));
  CHECK(off.N2 == doctest::Approx(6 * std::log2(0.62 / 0.32)).epsilon(0.01));
  CHECK_FALSE(off.holds);
  CHECK_THROWS_AS(compare_nearby(u6, Point2::Zero(), Point2(0.2, 0.0), 0.1, 3.0), InvalidArgument);
}

TEST_CASE("barycenter gain") {
  const Grid g = test::square(2.0, 257);
  const double side = 0.3;  // diam of an equilateral triangle is its side
  Simplex<2> s;
  for (int i = 0; i < 3; ++i) {
    const double t = pi / 2 + 2 * pi * i / 3;
    s.vertices[i] = side / std::sqrt(3.0) * Point2(std::cos(t), std::sin(t));
  }
  for (int k : {4, 6, 8}) {
    const auto rep = barycenter_test(test::real_power(g, k), s, 2.0);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.gain > 1.0);
  }
  CHECK(barycenter_test(constant(g, 1.0), s, 2.0).degenerate);
}

TEST_CASE("bad sub-cube counting") {
  const Grid g = test::square(2.0, 257);
  const Cube<2> Q{Point2::Zero(), 2.0};
  const CubeLattice coarse{5, 8, false};
  const auto lin = ScalarField::sample(g, [](const Point2& p) { return p.x(); });
  const auto none = count_bad_subcubes(lin, Q, 3, 5.0, coarse);
  CHECK(none.count == 0);
  CHECK(none.entries.size() == 9);

  const auto u = test::real_power(g, 12);
  const Hyperplane axis{Point2(0, 1), 0.0};
  const auto all = count_bad_subcubes(u, Q, 3, 1.0, coarse);
  const auto filtered = count_bad_subcubes(u, Q, 3, 1.0, coarse, axis);
  CHECK(filtered.count <= all.count);
  int meeting = 0;
  for (const auto& e : filtered.entries) {
    if (e.meets_plane) ++meeting;
    if (e.bad) CHECK(e.meets_plane);
    CHECK(e.meets_plane == (std::abs(e.cube.center.y()) <= 0.5 * e.cube.side));
  }
  CHECK(meeting == 3);
  CHECK_THROWS_AS(count_bad_subcubes(u, Q, 1, 1.0, coarse), InvalidArgument);
}

TEST_CASE("report files") {
  const auto dir = test::scratch("growth");
  const Grid g = test::square(1.0, 129);
  const auto p = frequency_profile(test::real_power(g, 2), CoefficientSet::laplace(g), Point2::Zero(),
                                   0.1, 0.4, 4);
  write_profile_csv(dir / "profile.csv", p);
  CHECK(first_line(dir / "profile.csv") == "r,H,D,I,beta");
  const Grid w = test::square(2.0, 129);
  write_cube_report_csv(dir / "cubes.csv",
                        count_bad_subcubes(test::real_power(w, 3), Cube<2>{Point2::Zero(), 2.0}, 2, 2.0,
                                           CubeLattice{3, 4, false}));
  CHECK(first_line(dir / "cubes.csv") == "i,j,cx,cy,N");
}
