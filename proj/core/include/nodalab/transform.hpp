#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "nodalab/fields.hpp"

namespace nodalab {

/// Smoothed distance to the boundary of a disk of radius R.
///
/// In the collar r >= s = R - collar it equals R - r. Inside the seam the
/// radial slope is -S(r/s) with the quintic smoothstep S(t) = 6t^5 - 15t^4 +
/// 10t^3, so the profile is C^2 across r = s and flat at the center.
class BlendedDistance {
 public:
  BlendedDistance(const Grid& disk, double collar);

  double radius() const { return radius_; }
  double collar() const { return collar_; }
  double seam() const { return seam_; }

  double value(double r) const;
  double slope(double r) const;      // d delta / dr
  double curvature(double r) const;  // d^2 delta / dr^2
  double laplacian(double r) const;  // delta'' + delta' / r
  Point2 gradient(const Point2& p) const;
  double max_value() const { return value(0.0); }

  const ScalarField& field() const { return delta_; }
  const std::vector<Point2>& gradient_field() const { return grad_; }
  const ScalarField& laplacian_field() const { return lap_; }

 private:
  double radius_, collar_, seam_;
  ScalarField delta_;
  std::vector<Point2> grad_;
  ScalarField lap_;
};

/// Throws InvalidArgument unless 0 < collar < R.
BlendedDistance blended_distance(const Grid& disk, double collar);

/// v = exp(lambda * delta) * phi. Throws InvalidArgument when
/// lambda * max(delta) > 700 or the grids differ.
ScalarField gauge_transform(const ScalarField& phi, double lambda, const BlendedDistance& delta);

/// a = I, b = -2 lambda grad(delta), c = lambda^2 |grad delta|^2 - lambda lap(delta).
CoefficientSet drift_and_potential(double lambda, const BlendedDistance& delta);

/// Copy of a disk field reflected across r = R onto the chart r in [0, 2R]
/// (extended disk grid with 2 nr rings). The glued metric in the chart is
/// dr^2 + rho(r)^2 dtheta^2 with rho(r) = r for r <= R and 2R - r beyond.
struct DoubledField {
  ScalarField values;
  ScalarField alpha;      // isotropic leading coefficient, reflected
  // Drift in metric-unit components (radial, unit angular) recombined along
  // the chart directions r^ and theta^ of each node. The radial part is zero
  // on the seam ring, where its one-sided limits are opposite.
  ScalarField b_x;
  ScalarField b_y;
  ScalarField potential;  // zeroth-order coefficient, reflected
  double neumann_flux = 0.0;  // max |one-sided d_r v| at r = R over ||v||_inf
  double residual = 0.0;      // max |glued equation residual| over ||v||_inf (rings 1..2nr-1)
  double residual_seam = 0.0;      // same, restricted to the seam ring
  double residual_interior = 0.0;  // same, excluding the seam ring

  double radius() const { return values.grid().radius(); }
  /// rho(r) / r: the angular stretch of the glued metric in the chart.
  double stretch(double r) const;
  /// Glued metric tensor in chart Cartesian coordinates.
  Eigen::Matrix2d metric(const Point2& p) const;
  /// Divergence-form coefficients (a, b, c) of the glued equation multiplied
  /// by sqrt(det metric), in chart Cartesian coordinates.
  Eigen::Matrix2d chart_a(const Point2& p) const;
  Point2 chart_b(const Point2& p) const;
  double chart_c(const Point2& p) const;
};

struct DoublingOptions {
  double neumann_tolerance = 0.1;
};

/// Reflects v and the coefficients of K (isotropic a) across r = R and
/// measures the residual of the glued equation on the doubled grid.
/// Throws PreconditionError when the measured boundary flux of v exceeds
/// options.neumann_tolerance (relative to ||v||_inf).
DoubledField double_across_boundary(const ScalarField& v, const CoefficientSet& coeffs,
                                    const DoublingOptions& options = {});

/// Max over chart nodes adjacent across r = R of
/// sum |metric_ij(x) - metric_ij(y)| / |x - y|.
double seam_metric_lipschitz(const DoubledField& doubled);

struct RescaledField {
  ScalarField field;      // on a disk grid of radius 1
  CoefficientSet coeffs;  // a, b / lambda, c / lambda^2 at the rescaled nodes
  Bounds bounds;          // verify_conditions of coeffs
  double lower_order_bound = 0.0;  // max of sum |b_i| + |c|
};

/// w(x) = v(x0 + x / lambda) on B(0, 1). Throws OutOfDomain when
/// B(x0, 1 / lambda) leaves the chart.
RescaledField rescale_to_wavelength(const DoubledField& doubled, const Point2& x0,
                                    double lambda, int nr = 32, int ntheta = 64);

/// Max over pairs of d_metric(x, y) / |x - y|, the metric length of the
/// straight chart segment integrated with 256 midpoint pieces. Throws
/// InvalidArgument for coincident points or pairs farther apart than 2 / lambda.
double metric_distance_check(const DoubledField& doubled,
                             const std::vector<std::pair<Point2, Point2>>& pairs,
                             double lambda);

struct CoefficientNorms {
  double b_over_lambda = 0.0;      // ||b||_inf / lambda
  double q_over_lambda2 = 0.0;     // ||q||_inf / lambda^2
  double grad_b_over_lambda2 = 0.0;  // reported only
  double grad_q_over_lambda3 = 0.0;  // reported only
};

CoefficientNorms coefficient_norms(const DoubledField& doubled, double lambda);

struct PipelineResult {
  double lambda = 0.0;
  Point2 x0 = Point2::Zero();
  ScalarField phi;
  ScalarField v;
  DoubledField doubled;
  RescaledField rescaled;
  CoefficientNorms norms;
  double seam_lipschitz = 0.0;
  std::size_t sign_mismatches = 0;  // nodes where sign(v) != sign(phi)
};

/// Gauge, double and rescale one eigenfunction at one center.
PipelineResult run_transform_pipeline(const ScalarField& phi, double lambda, const Point2& x0,
                                      double collar, const DoublingOptions& options = {});

/// One directory with field snapshots and a `manifest` listing stage residuals.
void write_pipeline_dump(const std::filesystem::path& dir, const PipelineResult& result);

}  // namespace nodalab
