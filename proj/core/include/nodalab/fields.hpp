#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nodalab/geometry.hpp"

namespace nodalab {

enum class GridKind { Rectangle, Disk };

/// Structured 2D grid over a rectangle or a disk.
///
/// Rectangle nodes are indexed i + nx*j with x_i = x_min + i*hx.
/// Disk nodes: index 0 is the center, ring i >= 1 node j has index
/// 1 + (i-1)*ntheta + j, sitting at radius i*dr and angle 2*pi*j/ntheta.
/// A disk grid may extend past its physical radius R (up to 2R) to hold the
/// reflected copy used by the boundary-gluing construction; the chart radius
/// then keeps running past R and ring nr is the seam.
class Grid {
 public:
  static Grid rectangle(double x_min, double x_max, double y_min, double y_max,
                        int nx, int ny);
  static Grid disk(double radius, int nr, int ntheta);
  /// Disk grid whose rings continue past the physical radius up to
  /// `extra_rings` further rings (extra_rings = nr gives the glued double).
  static Grid extended_disk(double radius, int nr, int ntheta, int extra_rings);

  GridKind kind() const { return kind_; }
  bool is_disk() const { return kind_ == GridKind::Disk; }

  // Rectangle accessors.
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double x(int i) const { return i == nx_ - 1 ? x_max_ : x_min_ + i * hx_; }
  double y(int j) const { return j == ny_ - 1 ? y_max_ : y_min_ + j * hy_; }

  // Disk accessors.
  double radius() const { return radius_; }
  int nr() const { return nr_; }
  int rings() const { return rings_; }
  int ntheta() const { return ntheta_; }
  double dr() const { return dr_; }
  double dtheta() const { return dtheta_; }
  double ring_radius(int i) const { return i == nr_ ? radius_ : i * dr_; }
  double theta(int j) const;
  double radial_extent() const { return ring_radius(rings_); }
  bool is_extended() const { return rings_ > nr_; }

  std::size_t node_count() const;
  std::size_t index(int i, int j) const;
  /// (i, j) of a node; the disk center reports (0, 0).
  std::pair<int, int> ij(std::size_t index) const;
  Point2 node(std::size_t index) const;

  /// Characteristic mesh size h (min(hx, hy), or dr on disks).
  double spacing() const;

  /// Physical boundary nodes: the rectangle frame, or ring nr of a disk.
  bool is_boundary_node(std::size_t index) const;
  std::vector<std::size_t> boundary_nodes() const;

  bool contains(const Point2& p, double tol = 1e-12) const;
  bool contains_ball(const Ball<2>& ball, double tol = 1e-12) const;

  bool operator==(const Grid& other) const;

  /// Short description used in snapshot headers, e.g.
  /// "grid=rectangle,nx=64,ny=64,...".
  std::string describe() const;

 private:
  GridKind kind_ = GridKind::Rectangle;
  int nx_ = 0, ny_ = 0;
  double x_min_ = 0, x_max_ = 0, y_min_ = 0, y_max_ = 0, hx_ = 0, hy_ = 0;
  double radius_ = 0;
  int nr_ = 0, rings_ = 0, ntheta_ = 0;
  double dr_ = 0, dtheta_ = 0;
};

/// Up to four (node, weight) pairs of the bilinear interpolation stencil.
struct Stencil {
  std::array<std::size_t, 4> node{};
  std::array<double, 4> weight{};
  int size = 0;
};

/// Bilinear (Cartesian) or (r, theta)-bilinear (disk, theta-periodic)
/// interpolation weights at p. Weights snap to exact 0/1 at nodes.
/// Throws OutOfDomain when p lies outside the grid by more than 1e-12.
Stencil interpolation_stencil(const Grid& grid, const Point2& p);

/// Which function a field samples.
enum class FieldTag { Solution, SteklovEigenfunction, Gauged, Rescaled };

namespace detail {
struct FieldCache;
}

/// Values sampled at the nodes of a grid. Immutable after construction.
class ScalarField {
 public:
  ScalarField(Grid grid, std::vector<double> values, FieldTag tag = FieldTag::Solution);

  static ScalarField sample(const Grid& grid,
                            const std::function<double(const Point2&)>& fn,
                            FieldTag tag = FieldTag::Solution);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double value(std::size_t node) const { return values_[node]; }
  FieldTag tag() const { return tag_; }

  double eval(const Point2& p) const;
  /// Tensor cubic Lagrange interpolation on rectangles (stencil shifted
  /// inward at the frame), bilinear on disks. Used by the quadratures.
  double eval_smooth(const Point2& p) const;
  double max_abs() const;

  /// Gradient at every node. Rectangles: fourth-order central differences,
  /// dropping to second order next to the frame and one-sided on it. Disks:
  /// second-order polar differences, one-sided on the outermost ring, least
  /// squares over the first ring at the center.
  const std::vector<Point2>& nodal_gradient() const;

  /// Max of |values| over rectangle nodes i in [i0, i1] of row j (inclusive).
  double row_max_abs(int j, int i0, int i1) const;

  ScalarField with_tag(FieldTag tag) const;

 private:
  Grid grid_;
  std::vector<double> values_;
  FieldTag tag_;
  std::shared_ptr<detail::FieldCache> cache_;
};

/// Fields a^{ij}, b^i, c of the operator
///   Lu = d_i(a^{ij} d_j u) + b^i d_i u + c u
/// sampled at grid nodes.
struct Bounds {
  double eta = 0.0;     // min eigenvalue of a over nodes
  double Lambda = 0.0;  // max of sum|a^{ij}| + sum|b^i| + |c|
  double Gamma = 0.0;   // Lipschitz quotient of a over adjacent node pairs
};

class CoefficientSet {
 public:
  using MatrixFn = std::function<Eigen::Matrix2d(const Point2&)>;
  using VectorFn = std::function<Point2(const Point2&)>;
  using ScalarFn = std::function<double(const Point2&)>;

  CoefficientSet(Grid grid, std::vector<Eigen::Matrix2d> a, std::vector<Point2> b,
                 std::vector<double> c);

  static CoefficientSet laplace(const Grid& grid);
  static CoefficientSet from_functions(const Grid& grid, const MatrixFn& a,
                                       const VectorFn& b, const ScalarFn& c);

  const Grid& grid() const { return grid_; }
  const Eigen::Matrix2d& a(std::size_t node) const { return a_[node]; }
  const Point2& b(std::size_t node) const { return b_[node]; }
  double c(std::size_t node) const { return c_[node]; }

  Eigen::Matrix2d a_at(const Point2& p) const;
  Point2 b_at(const Point2& p) const;
  double c_at(const Point2& p) const;

  /// True when every a(x) is a scalar multiple of the identity.
  bool is_isotropic(double tol = 1e-12) const;
  bool has_lower_order_terms() const;

  const std::optional<Bounds>& measured() const { return measured_; }
  void set_measured(const Bounds& bounds) { measured_ = bounds; }

 private:
  Grid grid_;
  std::vector<Eigen::Matrix2d> a_;
  std::vector<Point2> b_;
  std::vector<double> c_;
  std::optional<Bounds> measured_;
};

void check_ball_inside(const Grid& grid, const Ball<2>& ball, const char* who);

/// Estimates (eta, Lambda, Gamma) of the coefficient set.
/// Throws InvalidCoefficient if a is not symmetric at some node.
Bounds verify_conditions(const CoefficientSet& coeffs);

/// Sampling scheme for ball suprema. For B(x, r) the sample set is the grid
/// nodes inside B plus the rings of radius r, r/2, r/4, ... (down to the mesh
/// size) about x, so the set for B(x, 2r) contains the set for B(x, r).
struct SupSampling {
  double samples_per_unit_length = 256.0;
  int min_ring_samples = 32;
  int refine_iterations = 24;  // golden-section steps around the best sample
};

double sup_abs_on_ball(const ScalarField& f, const Ball<2>& ball,
                       const SupSampling& sampling = {});

/// Suprema over B(x, r) and B(x, t*r) for an integer power-of-two t, sharing
/// ring evaluations. Returns {inner, outer}.
std::pair<double, double> sup_abs_inner_outer(const ScalarField& f, const Point2& x,
                                              double r, int t,
                                              const SupSampling& sampling = {});

enum class SphereIntegrand { Square, Given };

/// Trapezoid rule over m = max(64, 4*ceil(2*pi*r/h)) equispaced points of
/// eval_smooth.
double sphere_integral(const ScalarField& f, const Point2& center, double r,
                       SphereIntegrand integrand = SphereIntegrand::Square);

struct SquareIntegrand {};
struct GradSquareIntegrand {};
struct FrequencyIntegrand {
  const CoefficientSet* coeffs;
};

/// The nodal density integrated by ball_integral: u^2, |grad u|^2 or
/// |grad u|^2 + u (b . grad u) + c u^2.
ScalarField integrand_density(const ScalarField& f, SquareIntegrand);
ScalarField integrand_density(const ScalarField& f, GradSquareIntegrand);
ScalarField integrand_density(const ScalarField& f, FrequencyIntegrand integrand);

/// Integral of a nodal density over a ball, using a quadrature in polar
/// coordinates about the ball center (composite Gauss-Legendre in radius,
/// trapezoid in angle) applied to eval_smooth of the density.
double integrate_density_over_ball(const ScalarField& density, const Ball<2>& ball);

/// Throws OutOfDomain when the ball leaves the grid.
template <typename Integrand>
double ball_integral(const ScalarField& f, const Ball<2>& ball, Integrand integrand) {
  check_ball_inside(f.grid(), ball, "ball_integral");
  return integrate_density_over_ball(integrand_density(f, integrand), ball);
}

}  // namespace nodalab
