#include "nodalab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "nodalab/errors.hpp"

namespace nodalab {

template <int Dim>
Ball<Dim> make_ball(const Point<Dim>& center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("ball radius must be positive and finite");
  }
  return Ball<Dim>{center, radius};
}

template <int Dim>
Ball<Dim> scale_ball(const Ball<Dim>& ball, double t) {
  return make_ball<Dim>(ball.center, t * ball.radius);
}

template <int Dim>
double Cube<Dim>::diameter() const {
  return side * std::sqrt(static_cast<double>(Dim));
}

template <int Dim>
double Cube<Dim>::volume() const {
  return std::pow(side, Dim);
}

template <int Dim>
Point<Dim> Cube<Dim>::lower() const {
  return center.array() - 0.5 * side;
}

template <int Dim>
Point<Dim> Cube<Dim>::upper() const {
  return center.array() + 0.5 * side;
}

template <int Dim>
bool Cube<Dim>::contains(const Point<Dim>& p, double tol) const {
  return ((p - center).cwiseAbs().array() <= 0.5 * side + tol).all();
}

template <int Dim>
Cube<Dim> make_cube(const Point<Dim>& center, double side) {
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw InvalidArgument("cube side must be positive and finite");
  }
  return Cube<Dim>{center, side};
}

template <int Dim>
double Simplex<Dim>::diameter() const {
  double d = 0.0;
  for (int i = 0; i <= Dim; ++i) {
    for (int j = i + 1; j <= Dim; ++j) {
      d = std::max(d, (vertices[i] - vertices[j]).norm());
    }
  }
  return d;
}

template <int Dim>
std::array<int, Dim> subcube_index(std::size_t k, int parts) {
  std::array<int, Dim> idx{};
  for (int axis = Dim - 1; axis >= 0; --axis) {
    idx[axis] = static_cast<int>(k % static_cast<std::size_t>(parts));
    k /= static_cast<std::size_t>(parts);
  }
  return idx;
}

template <int Dim>
std::vector<Cube<Dim>> subdivide_cube(const Cube<Dim>& cube, int parts) {
  if (parts < 1) {
    throw InvalidArgument("subdivide_cube: number of parts must be >= 1");
  }
  std::size_t total = 1;
  for (int d = 0; d < Dim; ++d) total *= static_cast<std::size_t>(parts);

  const double sub = cube.side / parts;
  const Point<Dim> lo = cube.lower();
  std::vector<Cube<Dim>> out;
  out.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    const auto idx = subcube_index<Dim>(k, parts);
    Point<Dim> c;
    for (int d = 0; d < Dim; ++d) {
      // (2i+1)/(2A) of the side, written to keep the A = 1 case exact.
      c[d] = parts == 1 ? cube.center[d]
                        : lo[d] + cube.side * (2.0 * idx[d] + 1.0) / (2.0 * parts);
    }
    out.push_back(Cube<Dim>{c, parts == 1 ? cube.side : sub});
  }
  return out;
}

namespace {

double point_line_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return 0.0;
  const Point2 w = p - a;
  return std::abs(d.x() * w.y() - d.y() * w.x()) / len;
}

double simplex_width(const Simplex<2>& s) {
  const auto& v = s.vertices;
  double w = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    w = std::min(w, point_line_distance(v[i], v[(i + 1) % 3], v[(i + 2) % 3]));
  }
  return w;
}

// Width of a tetrahedron: attained along a facet normal or along the common
// normal of a pair of opposite edges.
double simplex_width(const Simplex<3>& s) {
  const auto& v = s.vertices;
  double w = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const Point3& a = v[(i + 1) % 4];
    const Point3& b = v[(i + 2) % 4];
    const Point3& c = v[(i + 3) % 4];
    const Point3 n = (b - a).cross(c - a);
    const double nn = n.norm();
    if (nn == 0.0) return 0.0;
    w = std::min(w, std::abs(n.dot(v[i] - a)) / nn);
  }
  constexpr int pairs[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
  for (const auto& p : pairs) {
    const Point3 e1 = v[p[1]] - v[p[0]];
    const Point3 e2 = v[p[3]] - v[p[2]];
    const Point3 n = e1.cross(e2);
    const double nn = n.norm();
    if (nn == 0.0) continue;  // parallel opposite edges: facet directions cover it
    w = std::min(w, std::abs(n.dot(v[p[2]] - v[p[0]])) / nn);
  }
  return w;
}

}  // namespace

template <int Dim>
double relative_width(const Simplex<Dim>& simplex) {
  const double diam = simplex.diameter();
  if (!(diam > 0.0)) {
    throw InvalidArgument("relative_width: simplex has zero diameter");
  }
  return std::clamp(simplex_width(simplex) / diam, 0.0, 1.0);
}

template <int Dim>
Point<Dim> barycenter(const Simplex<Dim>& simplex) {
  Point<Dim> sum = Point<Dim>::Zero();
  for (const auto& v : simplex.vertices) sum += v;
  return sum / static_cast<double>(Dim + 1);
}

template <>
std::vector<Point2> quasi_uniform_ball_points<2>(const Ball<2>& ball, int samples) {
  const int on_sphere = std::max(1, samples / 2);
  const int inside = std::max(0, samples - on_sphere);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < on_sphere; ++k) {
    const double t = 2.0 * std::numbers::pi * k / on_sphere;
    pts.emplace_back(ball.center + ball.radius * Point2(std::cos(t), std::sin(t)));
  }
  for (int k = 0; k < inside; ++k) {
    const double r = ball.radius * std::sqrt((k + 0.5) / inside);
    const double t = k * golden;
    pts.emplace_back(ball.center + r * Point2(std::cos(t), std::sin(t)));
  }
  return pts;
}

template <>
std::vector<Point3> quasi_uniform_ball_points<3>(const Ball<3>& ball, int samples) {
  const int on_sphere = std::max(1, samples / 2);
  const int inside = std::max(0, samples - on_sphere);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  auto fibonacci = [&](int k, int n) {
    const double z = 1.0 - 2.0 * (k + 0.5) / n;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double t = k * golden;
    return Point3(s * std::cos(t), s * std::sin(t), z);
  };
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < on_sphere; ++k) {
    pts.emplace_back(ball.center + ball.radius * fibonacci(k, on_sphere));
  }
  for (int k = 0; k < inside; ++k) {
    const double r = ball.radius * std::cbrt((k + 0.5) / inside);
    pts.emplace_back(ball.center + r * fibonacci(k, inside));
  }
  return pts;
}

template <int Dim>
bool covering_check(const Simplex<Dim>& simplex, double rho, double alpha, int samples) {
  if (!(rho > 0.0) || !(alpha > 0.0)) {
    throw InvalidArgument("covering_check: rho and alpha must be positive");
  }
  const Ball<Dim> big{barycenter(simplex), (1.0 + alpha) * rho};
  const double r2 = rho * rho;
  for (const auto& p : quasi_uniform_ball_points<Dim>(big, samples)) {
    const bool covered = std::any_of(
        simplex.vertices.begin(), simplex.vertices.end(),
        [&](const Point<Dim>& v) { return (p - v).squaredNorm() <= r2; });
    if (!covered) return false;
  }
  return true;
}

#define NODALAB_INSTANTIATE_GEOMETRY(D)                                              \
  template Ball<D> make_ball<D>(const Point<D>&, double);                            \
  template Ball<D> scale_ball<D>(const Ball<D>&, double);                            \
  template struct Cube<D>;                                                           \
  template Cube<D> make_cube<D>(const Point<D>&, double);                            \
  template struct Simplex<D>;                                                        \
  template std::vector<Cube<D>> subdivide_cube<D>(const Cube<D>&, int);              \
  template std::array<int, D> subcube_index<D>(std::size_t, int);                    \
  template double relative_width<D>(const Simplex<D>&);                              \
  template Point<D> barycenter<D>(const Simplex<D>&);                                \
  template bool covering_check<D>(const Simplex<D>&, double, double, int);

NODALAB_INSTANTIATE_GEOMETRY(2)
NODALAB_INSTANTIATE_GEOMETRY(3)

#undef NODALAB_INSTANTIATE_GEOMETRY

}  // namespace nodalab
