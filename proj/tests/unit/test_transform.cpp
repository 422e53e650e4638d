#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nodalab/elliptic.hpp"
#include "nodalab/errors.hpp"
#include "nodalab/transform.hpp"
#include "support.hpp"

using namespace nodalab;

namespace {

ScalarField constant(const Grid& g, double c) {
  return ScalarField::sample(g, [c](const Point2&) { return c; });
}

}  // namespace

TEST_CASE("blended distance") {
  const Grid d = Grid::disk(1.0, 40, 80);
  const auto delta = blended_distance(d, 0.2);
  CHECK(delta.value(0.9) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(delta.gradient(Point2(0.9, 0.0)).norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(delta.gradient(Point2(0.5, 0.6)).norm() <= 1.0);
  for (double r = 0.81; r <= 1.0; r += 0.01) {
    CHECK(delta.value(r) == doctest::Approx(1.0 - r).epsilon(1e-14));
    CHECK(delta.laplacian(r) == doctest::Approx(-1.0 / r).epsilon(1e-14));
  }
  // Value, slope and curvature continuous across the seam.
  const double s = delta.seam(), e = 1e-9;
  CHECK(std::abs(delta.value(s - e) - delta.value(s + e)) < 1e-8);
  CHECK(std::abs(delta.slope(s - e) - delta.slope(s + e)) <= 1e-6);
  CHECK(std::abs(delta.curvature(s - e) - delta.curvature(s + e)) <= 1e-6);
  CHECK(delta.slope(0.0) == 0.0);
  // Slope is monotone and the profile decreasing.
  for (double r = 0.0; r < 1.0; r += 0.01) CHECK(delta.value(r + 0.01) < delta.value(r));

  // The field Laplacian against the polar finite-difference Laplacian of delta.
  const auto lap = assemble(CoefficientSet::laplace(d)).apply(delta.field());
  const auto& nodes = assemble(CoefficientSet::laplace(d)).interior_nodes();
  double worst = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double r = d.node(nodes[k]).norm();
    if (r > 0.85 && r < 0.99) worst = std::max(worst, std::abs(lap[static_cast<Eigen::Index>(k)] + 1.0 / r));
  }
  CHECK(worst < 1e-3);
  CHECK_THROWS_AS(blended_distance(d, 1.5), InvalidArgument);
  CHECK_THROWS_AS(blended_distance(test::square(1.0, 9), 0.2), InvalidArgument);
}

TEST_CASE("gauge transform") {
  const Grid d = Grid::disk(1.0, 10, 40);
  const auto delta = blended_distance(d, 0.25);
  const auto phi = disk_analytic_eigenpair(d, 1, Parity::Even).interior;
  const auto same = gauge_transform(phi, 0.0, delta);
  CHECK(std::equal(same.values().begin(), same.values().end(), phi.values().begin()));

  const auto v = gauge_transform(phi, 1.0, delta);
  CHECK(v.tag() == FieldTag::Gauged);
  const std::size_t at = d.index(9, 0);
  CHECK(v.value(at) == doctest::Approx(std::exp(0.1) * 0.9).epsilon(1e-14));

  const auto pos = ScalarField::sample(d, [](const Point2& p) { return 0.1 + p.squaredNorm(); });
  const auto vpos = gauge_transform(pos, 7.0, delta);
  for (double x : vpos.values()) CHECK(x > 0.0);
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    if (phi.value(n) != 0.0) CHECK((v.value(n) > 0) == (phi.value(n) > 0));
  }
  CHECK_THROWS_AS(gauge_transform(phi, 1e4, delta), InvalidArgument);
}

TEST_CASE("drift and potential") {
  const Grid d = Grid::disk(1.0, 10, 40);
  const auto delta = blended_distance(d, 0.25);
  const auto K = drift_and_potential(5.0, delta);
  const std::size_t at = d.index(9, 3);
  CHECK(K.b(at).norm() == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(K.c(at) == doctest::Approx(25.0 + 5.0 / 0.9).epsilon(1e-12));
  CHECK(K.is_isotropic());

  const auto zero = drift_and_potential(0.0, delta);
  CHECK_FALSE(zero.has_lower_order_terms());
}

TEST_CASE("doubling a constant") {
  const Grid d = Grid::disk(1.0, 16, 32);
  const auto one = constant(d, 1.0);
  const auto doubled = double_across_boundary(one, CoefficientSet::laplace(d));
  CHECK(doubled.values.grid().rings() == 32);
  for (double v : doubled.values.values()) CHECK(v == 1.0);
  CHECK(doubled.residual <= 1e-9);
  CHECK(doubled.neumann_flux <= 1e-12);

  const auto w = rescale_to_wavelength(doubled, Point2(1.0, 0.0), 4.0);
  for (double v : w.field.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(rescale_to_wavelength(doubled, Point2(1.9, 0.0), 4.0), OutOfDomain);

  const auto lin = ScalarField::sample(d, [](const Point2& p) { return p.x(); });
  CHECK_THROWS_AS(double_across_boundary(lin, CoefficientSet::laplace(d)), PreconditionError);
}

TEST_CASE("metric distance") {
  const Grid d = Grid::disk(1.0, 16, 32);
  const auto doubled = double_across_boundary(constant(d, 1.0), CoefficientSet::laplace(d));
  const std::vector<std::pair<Point2, Point2>> flat = {{Point2(0.1, 0.2), Point2(0.3, 0.1)},
                                                       {Point2(-0.5, 0.0), Point2(-0.4, 0.2)}};
  CHECK(metric_distance_check(doubled, flat, 4.0) == doctest::Approx(1.0).epsilon(1e-6));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<std::pair<Point2, Point2>> seam;
  for (int k = 0; k < 50; ++k) {
    const double t = 3.14159 * U(rng);
    const Point2 on(std::cos(t), std::sin(t));
    seam.emplace_back(on * 0.95 + 0.05 * Point2(U(rng), U(rng)), on * 1.05 + 0.05 * Point2(U(rng), U(rng)));
  }
  const double ratio = metric_distance_check(doubled, seam, 4.0);
  CHECK(ratio > 0.0);
  CHECK(ratio <= 2.0);
  CHECK_THROWS_AS(metric_distance_check(doubled, {{Point2(0.1, 0.1), Point2(0.1, 0.1)}}, 4.0),
                  InvalidArgument);
}

TEST_CASE("pipeline on the disk eigenfunctions") {
  auto pipeline = [](int nr, int k) {
    const Grid d = Grid::disk(1.0, nr, 2 * nr);
    const auto pair = disk_analytic_eigenpair(d, k, Parity::Even);
    return run_transform_pipeline(pair.interior, pair.eigenvalue, Point2(1.0, 0.0), 0.25);
  };
  // Computed pairs: the discrete eigenfunction is what the gauge makes Neumann.
  auto computed = [](int nr) {
    const Grid d = Grid::disk(1.0, nr, 2 * nr);
    const auto s = steklov_spectrum(d, 13);
    const auto& pair = s.pairs[11].parity == Parity::Even ? s.pairs[11] : s.pairs[12];
    return run_transform_pipeline(pair.interior, pair.eigenvalue, Point2(1.0, 0.0), 0.25);
  };
  const auto coarse = computed(32);
  const auto fine = computed(64);
  CHECK(fine.lambda == doctest::Approx(6.0).epsilon(0.02));
  CHECK(fine.sign_mismatches == 0);
  CHECK(fine.doubled.neumann_flux < coarse.doubled.neumann_flux);
  const double halving = coarse.doubled.residual / fine.doubled.residual;
  INFO("residual " << coarse.doubled.residual << " -> " << fine.doubled.residual);
  CHECK(halving >= 1.4);
  CHECK(halving <= 2.6);

  // Mirror symmetry of the doubled field.
  const Grid& chart = fine.doubled.values.grid();
  for (int i = 1; i < chart.nr(); i += 3) {
    for (int j = 0; j < chart.ntheta(); j += 5) {
      CHECK(fine.doubled.values.value(chart.index(i, j)) ==
            fine.doubled.values.value(chart.index(2 * chart.nr() - i, j)));
    }
  }
  CHECK(seam_metric_lipschitz(fine.doubled) < 1e3);

  // Drift norm is exactly 2 lambda; rescaled bounds stay flat in lambda. The
  // chart stretch of the glued metric sets the ellipticity of the rescaled a.
  double lo = 1e300, hi = 0;
  for (int k : {4, 8, 16}) {
    const auto p = pipeline(64, k);
    CHECK(p.norms.b_over_lambda == doctest::Approx(2.0).epsilon(1e-9));
    lo = std::min(lo, p.rescaled.bounds.Lambda);
    hi = std::max(hi, p.rescaled.bounds.Lambda);
    CHECK(p.rescaled.bounds.eta == doctest::Approx((k - 1.0) / (k + 1.0)).epsilon(0.02));
  }
  CHECK(hi / lo - 1.0 <= 0.25);
}

TEST_CASE("pipeline dump") {
  const Grid d = Grid::disk(1.0, 16, 32);
  const auto pair = disk_analytic_eigenpair(d, 2, Parity::Even);
  const auto result = run_transform_pipeline(pair.interior, 2.0, Point2(0.0, 1.0), 0.25);
  const auto dir = test::scratch("pipeline");
  write_pipeline_dump(dir / "lambda2", result);
  CHECK(std::filesystem::exists(dir / "lambda2" / "manifest"));
}
