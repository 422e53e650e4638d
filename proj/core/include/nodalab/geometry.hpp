#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace nodalab {

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;
using Point2 = Point<2>;
using Point3 = Point<3>;

/// Closed Euclidean ball.
template <int Dim>
struct Ball {
  Point<Dim> center;
  double radius;
};

template <int Dim>
Ball<Dim> make_ball(const Point<Dim>& center, double radius);

/// Concentric ball with radius scaled by t (the "tB" notation).
template <int Dim>
Ball<Dim> scale_ball(const Ball<Dim>& ball, double t);

/// Axis-aligned cube.
template <int Dim>
struct Cube {
  Point<Dim> center;
  double side;

  double diameter() const;
  double volume() const;
  Point<Dim> lower() const;
  Point<Dim> upper() const;
  bool contains(const Point<Dim>& p, double tol = 0.0) const;
};

template <int Dim>
Cube<Dim> make_cube(const Point<Dim>& center, double side);

template <int Dim>
struct Simplex {
  std::array<Point<Dim>, Dim + 1> vertices;

  /// Largest pairwise vertex distance.
  double diameter() const;
};

/// Splits Q into A^n congruent sub-cubes of side Q.side / A, ordered
/// lexicographically by index vector (first axis slowest).
template <int Dim>
std::vector<Cube<Dim>> subdivide_cube(const Cube<Dim>& cube, int parts);

/// Index vector of the k-th sub-cube produced by subdivide_cube.
template <int Dim>
std::array<int, Dim> subcube_index(std::size_t k, int parts);

/// width(S) / diam(S), where width is the smallest distance between two
/// parallel hyperplanes enclosing S.
template <int Dim>
double relative_width(const Simplex<Dim>& simplex);

/// Arithmetic mean of the n+1 vertices.
template <int Dim>
Point<Dim> barycenter(const Simplex<Dim>& simplex);

/// Sampled check of B(x0, (1+alpha) rho) ⊂ ∪ B(x_i, rho) with x0 the
/// barycenter. Uses a deterministic low-discrepancy point set filling the
/// closed ball (half on the bounding sphere, half in the interior).
template <int Dim>
bool covering_check(const Simplex<Dim>& simplex, double rho, double alpha,
                    int samples = 4096);

/// The point set used by covering_check, exposed for independent oracles.
template <int Dim>
std::vector<Point<Dim>> quasi_uniform_ball_points(const Ball<Dim>& ball,
                                                  int samples);

}  // namespace nodalab
