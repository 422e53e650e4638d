#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nodalab/errors.hpp"
#include "nodalab/field_io.hpp"
#include "nodalab/fields.hpp"
#include "support.hpp"

using namespace nodalab;
using std::numbers::pi;

TEST_CASE("grid construction") {
  CHECK_THROWS_AS(Grid::rectangle(0, 1, 0, 1, 2, 5), InvalidArgument);
  CHECK_THROWS_AS(Grid::rectangle(1, 0, 0, 1, 5, 5), InvalidArgument);
  CHECK_THROWS_AS(Grid::disk(1.0, 2, 16), InvalidArgument);

  const Grid g = Grid::rectangle(-1, 2, 0, 1, 31, 11);
  CHECK(g.node_count() == 31 * 11);
  CHECK(g.node(g.index(30, 10)) == Point2(2, 1));
  for (int i = 1; i < g.nx(); ++i) CHECK(g.x(i) > g.x(i - 1));

  const Grid d = Grid::disk(1.0, 8, 16);
  CHECK(d.node_count() == 1 + 8 * 16);
  CHECK(d.node(0) == Point2::Zero());
  CHECK(d.node(d.index(8, 0)).x() == doctest::Approx(1.0));
  CHECK(d.boundary_nodes().size() == 16);
  const Grid e = Grid::extended_disk(1.0, 8, 16, 8);
  CHECK(e.radial_extent() == doctest::Approx(2.0));
  CHECK(e.boundary_nodes().size() == 16);
}

TEST_CASE("eval") {
  const Grid g = test::square(1.0, 64);
  CHECK(ScalarField::sample(g, [](const Point2&) { return 3.0; }).eval(Point2(0.123, -0.77)) == 3.0);
  const auto fx = ScalarField::sample(g, [](const Point2& p) { return p.x(); });
  CHECK(fx.eval(Point2(0.37, 0.2)) == doctest::Approx(0.37).epsilon(1e-14));
  CHECK_THROWS_AS(fx.eval(Point2(1.1, 0.0)), OutOfDomain);

  std::mt19937_64 rng(3);
  const auto fr = test::real_power(g, 3);
  for (int s = 0; s < 200; ++s) {
    const std::size_t n = rng() % g.node_count();
    CHECK(fr.eval(g.node(n)) == fr.value(n));
  }
  const Grid d = Grid::disk(1.0, 16, 32);
  const auto fd = test::real_power(d, 2);
  for (std::size_t n = 0; n < d.node_count(); n += 7) CHECK(fd.eval(d.node(n)) == fd.value(n));

  // Mid-cell error of x^2 is O(h^2): halving h divides it by 4.
  auto midcell_error = [](int n) {
    const Grid grid = test::square(1.0, n);
    const auto f = ScalarField::sample(grid, [](const Point2& p) { return p.x() * p.x(); });
    const Point2 p(grid.x(n / 3) + 0.5 * grid.hx(), grid.y(n / 2) + 0.5 * grid.hy());
    return std::abs(f.eval(p) - p.x() * p.x());
  };
  const double e64 = midcell_error(64), e128 = midcell_error(127);
  CHECK(e64 == doctest::Approx(0.25 * std::pow(2.0 / 63, 2)).epsilon(1e-9));
  CHECK(e64 / e128 == doctest::Approx(4.0).epsilon(0.01));

  // Cubic interpolation reproduces cubics.
  const auto cubic = ScalarField::sample(g, [](const Point2& p) { return std::pow(p.x(), 3) * p.y(); });
  for (const Point2& p : {Point2(0.311, -0.52), Point2(-0.99, 0.995), Point2(0.0071, 0.5)}) {
    CHECK(cubic.eval_smooth(p) == doctest::Approx(std::pow(p.x(), 3) * p.y()).epsilon(1e-12));
  }
}

TEST_CASE("gradient") {
  const Grid g = test::square(1.0, 65);
  const auto f = test::real_power(g, 3);
  const auto& grad = f.nodal_gradient();
  double worst = 0;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const Point2 p = g.node(n);
    const Point2 exact(3 * (p.x() * p.x() - p.y() * p.y()), -6 * p.x() * p.y());
    worst = std::max(worst, (grad[n] - exact).norm());
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("sup_abs_on_ball examples") {
  const Grid g = test::square(2.0, 257);
  const auto c = ScalarField::sample(g, [](const Point2&) { return -2.0; });
  CHECK(sup_abs_on_ball(c, Ball<2>{Point2(0.3, 0.1), 0.4}) == 2.0);
  const auto fx = ScalarField::sample(g, [](const Point2& p) { return p.x(); });
  CHECK(sup_abs_on_ball(fx, Ball<2>{Point2::Zero(), 1.0}) == doctest::Approx(1.0).epsilon(1e-3));

  const auto f2 = test::real_power(g, 2);
  const Ball<2> B{Point2(0.5, 0.0), 0.25};
  double oracle = 0;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j < 1600; ++j) {
      const double r = B.radius * i / 400.0, t = 2 * pi * j / 1600.0;
      oracle = std::max(oracle, std::abs(test::re_power(B.center + r * Point2(std::cos(t), std::sin(t)), 2)));
    }
  }
  CHECK(sup_abs_on_ball(f2, B) == doctest::Approx(oracle).epsilon(1e-3));
  CHECK_THROWS_AS(sup_abs_on_ball(f2, Ball<2>{Point2(1.9, 0), 0.2}), OutOfDomain);
}

TEST_CASE("sup nestedness") {
  const Grid g = test::square(1.0, 129);
  const auto f = ScalarField::sample(g, [](const Point2& p) {
    return std::sin(7 * p.x()) * std::cos(5 * p.y()) + 0.3 * test::re_power(p, 5);
  });
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  for (int trial = 0; trial < 60; ++trial) {
    const Point2 x(U(rng), U(rng));
    const double r = 0.05 + 0.02 * (trial % 5);
    const double s1 = sup_abs_on_ball(f, Ball<2>{x, r});
    const double s2 = sup_abs_on_ball(f, Ball<2>{x, 2 * r});
    const double s4 = sup_abs_on_ball(f, Ball<2>{x, 4 * r});
    CHECK(s1 <= s2);
    CHECK(s2 <= s4);
    const auto [inner, outer] = sup_abs_inner_outer(f, x, r, 2);
    CHECK(inner == s1);
    CHECK(outer == s2);
  }
  CHECK_THROWS_AS(sup_abs_inner_outer(f, Point2::Zero(), 0.1, 3), InvalidArgument);
}

TEST_CASE("sphere_integral oracles") {
  const Grid g = test::square(1.0, 257);
  const auto one = ScalarField::sample(g, [](const Point2&) { return 1.0; });
  CHECK(sphere_integral(one, Point2::Zero(), 0.5, SphereIntegrand::Given) ==
        doctest::Approx(pi).epsilon(1e-6));

  const Grid fine = test::square(1.0, 513);
  for (int k = 1; k <= 6; ++k) {
    const auto u = test::real_power(fine, k);
    for (double r : {0.1, 0.25, 0.4}) {
      CHECK(sphere_integral(u, Point2::Zero(), r) ==
            doctest::Approx(pi * std::pow(r, 2 * k + 1)).epsilon(5e-3));
    }
  }
  const auto fx = ScalarField::sample(fine, [](const Point2& p) { return p.x(); });
  CHECK(sphere_integral(fx, Point2::Zero(), 0.3) == doctest::Approx(pi * 0.027).epsilon(5e-3));
}

TEST_CASE("ball_integral oracles") {
  const Grid g = test::square(1.0, 513);
  const auto one = ScalarField::sample(g, [](const Point2&) { return 1.0; });
  CHECK(ball_integral(one, Ball<2>{Point2::Zero(), 1.0}, SquareIntegrand{}) ==
        doctest::Approx(pi).epsilon(5e-3));
  for (int k = 1; k <= 6; ++k) {
    const auto u = test::real_power(g, k);
    const double r = 0.35;
    CHECK(ball_integral(u, Ball<2>{Point2::Zero(), r}, GradSquareIntegrand{}) ==
          doctest::Approx(pi * k * std::pow(r, 2 * k)).epsilon(1e-2));
  }
  const auto K = CoefficientSet::from_functions(
      g, [](const Point2&) { return Eigen::Matrix2d::Identity(); },
      [](const Point2&) { return Point2::Zero(); }, [](const Point2&) { return -1.0; });
  CHECK(ball_integral(one, Ball<2>{Point2::Zero(), 0.5}, FrequencyIntegrand{&K}) ==
        doctest::Approx(-pi * 0.25).epsilon(1e-2));
  CHECK_THROWS_AS(ball_integral(one, Ball<2>{Point2(0.9, 0), 0.2}, SquareIntegrand{}), OutOfDomain);
}

TEST_CASE("quadrature converges under refinement") {
  // Off-center balls so nodes do not line up with the circle.
  const Point2 c(0.113, -0.071);
  const double r = 0.37;
  auto errors = [&](int n) {
    const Grid g = test::square(1.0, n);
    const auto u = test::real_power(g, 4);
    const auto exact_sphere = [&] {
      double s = 0;
      const int m = 20000;
      for (int j = 0; j < m; ++j) {
        const double t = 2 * pi * j / m;
        const double v = test::re_power(c + r * Point2(std::cos(t), std::sin(t)), 4);
        s += v * v;
      }
      return s * 2 * pi * r / m;
    }();
    // Integral of |grad Re z^4|^2 = 16|z|^6 over the disk, by a fine polar midpoint sum.
    double exact_ball = 0;
    const int nr = 400, nt = 800;
    for (int i = 0; i < nr; ++i) {
      const double rho = r * (i + 0.5) / nr;
      for (int j = 0; j < nt; ++j) {
        const double t = 2 * pi * j / nt;
        const Point2 p = c + rho * Point2(std::cos(t), std::sin(t));
        exact_ball += 16 * std::pow(p.squaredNorm(), 3) * rho;
      }
    }
    exact_ball *= (r / nr) * (2 * pi / nt);
    return std::pair{std::abs(sphere_integral(u, c, r) - exact_sphere) / exact_sphere,
                     std::abs(ball_integral(u, Ball<2>{c, r}, GradSquareIntegrand{}) - exact_ball) /
                         exact_ball};
  };
  const auto [s64, b64] = errors(65);
  const auto [s128, b128] = errors(129);
  INFO("sphere " << s64 << " -> " << s128 << ", ball " << b64 << " -> " << b128);
  CHECK(s64 / s128 >= 3.0);
  CHECK(b64 / b128 >= 3.0);
}

TEST_CASE("averaged integral is bounded by the squared sup") {
  const Grid g = test::square(1.0, 129);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  const std::vector<ScalarField> fields = {
      test::real_power(g, 3), ScalarField::sample(g, [](const Point2& p) { return std::exp(p.x()) * std::sin(4 * p.y()); }),
      ScalarField::sample(g, [](const Point2& p) { return 1.0 + p.x() * p.y(); })};
  for (const auto& f : fields) {
    for (int trial = 0; trial < 20; ++trial) {
      const Ball<2> B{Point2(U(rng), U(rng)), 0.1 + 0.4 * std::abs(U(rng))};
      const double avg = ball_integral(f, B, SquareIntegrand{}) / (pi * B.radius * B.radius);
      const double s = sup_abs_on_ball(f, B);
      CHECK(avg <= s * s + 1e-9);
    }
  }
}

TEST_CASE("verify_conditions") {
  const Grid g = test::square(1.0, 65);
  const auto b = verify_conditions(CoefficientSet::laplace(g));
  CHECK(b.eta == 1.0);
  CHECK(b.Lambda == 2.0);
  CHECK(b.Gamma == 0.0);

  const auto c5 = CoefficientSet::from_functions(
      g, [](const Point2&) { return Eigen::Matrix2d::Identity(); },
      [](const Point2&) { return Point2::Zero(); }, [](const Point2&) { return 5.0; });
  CHECK(verify_conditions(c5).Lambda == 7.0);

  // Lipschitz quotient summed over all entries: both diagonal entries move at
  // slope |x|, so the limit is 2.
  auto gamma = [](int n) {
    const Grid grid = test::square(1.0, n);
    const auto K = CoefficientSet::from_functions(
        grid,
        [](const Point2& p) { return Eigen::Matrix2d(Eigen::Matrix2d::Identity() * (1 + p.x() * p.x() / 2)); },
        [](const Point2&) { return Point2::Zero(); }, [](const Point2&) { return 0.0; });
    const auto bounds = verify_conditions(K);
    CHECK(bounds.eta == doctest::Approx(1.0));
    return bounds.Gamma;
  };
  const double g33 = gamma(33), g129 = gamma(129);
  CHECK(std::abs(g129 - 2.0) < std::abs(g33 - 2.0));
  CHECK(g129 == doctest::Approx(2.0).epsilon(0.02));

  const auto skew = CoefficientSet::from_functions(
      g, [](const Point2&) { Eigen::Matrix2d m; m << 1, 0.5, 0, 1; return m; },
      [](const Point2&) { return Point2::Zero(); }, [](const Point2&) { return 0.0; });
  CHECK_THROWS_AS(verify_conditions(skew), InvalidCoefficient);
}

TEST_CASE("field snapshot round trip is bit exact") {
  const auto dir = test::scratch("fields");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1e3, 1e3);
  for (const Grid& g : {Grid::rectangle(-1, 2, -0.5, 0.5, 17, 9), Grid::disk(1.0, 6, 12),
                        Grid::extended_disk(1.0, 6, 12, 6)}) {
    std::vector<double> v(g.node_count());
    for (double& x : v) x = U(rng) / 3.0;
    const ScalarField f(g, v, FieldTag::Gauged);
    write_field_csv(dir / "f.csv", f);
    const auto back = read_field_csv(dir / "f.csv");
    CHECK(back.grid() == g);
    CHECK(back.tag() == FieldTag::Gauged);
    CHECK(std::equal(v.begin(), v.end(), back.values().begin()));
  }
  std::istringstream junk("not a snapshot\n");
  CHECK_THROWS_AS(read_field_csv(junk), Error);
}
