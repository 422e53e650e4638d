#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "doctest.h"
#include "nodalab/errors.hpp"
#include "nodalab/nodal.hpp"
#include "support.hpp"

using namespace nodalab;
using std::numbers::pi;

namespace {

double circle_error(int n) {
  const Grid g = test::square(1.0, n);
  const auto u = ScalarField::sample(g, [](const Point2& p) { return p.squaredNorm() - 0.25; });
  return std::abs(extract_nodal_set(u).total_length - pi);
}

int count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("straight line") {
  for (int n : {64, 65}) {
    const Grid g = test::square(1.0, n);
    const auto u = ScalarField::sample(g, [](const Point2& p) { return p.x(); });
    const auto c = extract_nodal_set(u);
    CHECK(c.total_length == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(c.perturbed_zeros == (n % 2 == 1 ? static_cast<std::size_t>(n) : 0u));
    for (const auto& s : c.segments) {
      CHECK(std::abs(s.a.x()) < 1e-6);
      CHECK(std::abs(s.b.x()) < 1e-6);
    }
    CHECK(length_in_region(c, Ball<2>{Point2::Zero(), 0.5}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(length_in_region(c, Cube<2>{Point2(0.0, 0.3), 1.0}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(length_in_region(c, Ball<2>{Point2(0.6, 0.0), 0.3}) == 0.0);
    CHECK(length_in_region(c, Cube<2>{Point2(-0.6, 0.2), 0.5}) == 0.0);
  }
}

TEST_CASE("circle converges to its circumference") {
  const double e128 = circle_error(128), e256 = circle_error(256), e512 = circle_error(512);
  INFO(e128 << " " << e256 << " " << e512);
  CHECK(e512 <= 3e-3 * pi);
  CHECK(e128 / e256 >= 3.0);
  CHECK(e256 / e512 >= 3.0);
}

TEST_CASE("empty and degenerate sets") {
  const Grid g = test::square(1.0, 33);
  const auto one = extract_nodal_set(ScalarField::sample(g, [](const Point2&) { return 1.0; }));
  CHECK(one.segments.empty());
  CHECK(one.total_length == 0.0);
  CHECK_FALSE(one.degenerate);
  const auto zero = extract_nodal_set(ScalarField::sample(g, [](const Point2&) { return 0.0; }));
  CHECK(zero.degenerate);
  CHECK(zero.total_length == 0.0);
}

TEST_CASE("segment bookkeeping") {
  const Grid g = test::square(1.0, 97);
  const auto u = ScalarField::sample(g, [](const Point2& p) {
    return std::sin(5 * p.x()) * std::cos(4 * p.y()) + 0.2 * test::re_power(p, 3);
  });
  const auto c = extract_nodal_set(u);
  REQUIRE_FALSE(c.segments.empty());
  double total = 0;
  for (const auto& s : c.segments) {
    total += s.length();
    for (const auto& e : {s.edge_a, s.edge_b}) {
      const double ua = u.value(e[0]), ub = u.value(e[1]);
      CHECK((ua * ub < 0.0 || ua == 0.0 || ub == 0.0));
    }
  }
  CHECK(total == doctest::Approx(c.total_length).epsilon(1e-14));

  // Additive over a partition of a cube.
  const Cube<2> Q{Point2(0.05, -0.1), 1.6};
  for (int A : {2, 5, 9}) {
    double sum = 0;
    for (const auto& q : subdivide_cube(Q, A)) sum += length_in_region(c, q);
    CHECK(std::abs(sum - length_in_region(c, Q)) <= 1e-9);
  }
}

TEST_CASE("disk eigenfunctions") {
  const Grid d = Grid::disk(1.0, 128, 256);
  const auto c3 = extract_nodal_set(disk_analytic_eigenpair(d, 3, Parity::Even).interior);
  CHECK(c3.total_length == doctest::Approx(6.0).epsilon(0.01));
  for (double r : {0.3, 0.5, 0.8}) {
    CHECK(length_in_region(c3, Ball<2>{Point2::Zero(), r}) == doctest::Approx(6 * r).epsilon(0.01));
  }

  const Grid coarse = Grid::disk(1.0, 64, 128);
  const auto s = steklov_spectrum(coarse, 11);
  CHECK(nodal_length_of_eigenfunction(s, 0).length == 0.0);
  const auto k1 = nodal_length_of_eigenfunction(s, 1);
  CHECK(k1.eigenvalue == doctest::Approx(1.0).epsilon(0.02));
  CHECK(k1.length == doctest::Approx(2.0).epsilon(0.02));
  const auto k4 = nodal_length_of_eigenfunction(s, 4);
  CHECK(k4.length == doctest::Approx(8.0).epsilon(0.02));
  CHECK(nodal_length_of_eigenfunction(coarse, 2).length == doctest::Approx(4.0).epsilon(0.02));
  CHECK(s.pairs[nearest_even_pair(s, 3.2)].parity == Parity::Even);
  CHECK(s.pairs[nearest_even_pair(s, 3.2)].eigenvalue == doctest::Approx(3.0).epsilon(0.02));
  CHECK_THROWS_AS(nodal_length_of_eigenfunction(s, -1), InvalidArgument);
}

TEST_CASE("curve export") {
  const auto dir = test::scratch("nodal");
  const Grid g = test::square(1.0, 64);
  const auto c = extract_nodal_set(ScalarField::sample(g, [](const Point2& p) { return p.x() - 0.2 * p.y(); }));
  write_curve_csv(dir / "c.csv", c);
  CHECK(count_lines(dir / "c.csv") == static_cast<int>(c.segments.size()) + 1);
  write_curve_svg(dir / "c.svg", c);
  std::ifstream svg(dir / "c.svg");
  const std::string text((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("</svg>") != std::string::npos);
}
