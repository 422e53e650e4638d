#include "nodalab/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "nodalab/errors.hpp"

namespace nodalab {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Crossing {
  Point2 p;
  std::array<std::size_t, 2> edge;
};

class Contourer {
 public:
  Contourer(const Grid& grid, std::vector<double> values)
      : grid_(grid), v_(std::move(values)) {}

  bool sign(std::size_t n) const { return v_[n] > 0.0; }

  // Orders the edge by node index so both neighbouring cells compute the
  // same point bit for bit.
  Crossing crossing(std::size_t a, std::size_t b) const {
    if (b < a) std::swap(a, b);
    const double t = v_[a] / (v_[a] - v_[b]);
    const Point2 pa = grid_.node(a), pb = grid_.node(b);
    return {pa + t * (pb - pa), {a, b}};
  }

  void emit(const Crossing& c1, const Crossing& c2, std::vector<NodalSegment>& out) const {
    out.push_back({c1.p, c2.p, c1.edge, c2.edge});
  }

  // Corners in cyclic order; edge e joins corner e and corner e+1.
  void quad(const std::array<std::size_t, 4>& c, std::vector<NodalSegment>& out) const {
    std::array<int, 4> cut{};
    int count = 0;
    for (int e = 0; e < 4; ++e) {
      if (sign(c[e]) != sign(c[(e + 1) % 4])) cut[count++] = e;
    }
    auto edge = [&](int e) { return crossing(c[e], c[(e + 1) % 4]); };
    if (count == 2) {
      emit(edge(cut[0]), edge(cut[1]), out);
    } else if (count == 4) {
      const double mean = 0.25 * (v_[c[0]] + v_[c[1]] + v_[c[2]] + v_[c[3]]);
      if ((mean > 0.0) == sign(c[0])) {
        // Corners 0 and 2 connect through the center: cut off 1 and 3.
        emit(edge(0), edge(1), out);
        emit(edge(2), edge(3), out);
      } else {
        emit(edge(3), edge(0), out);
        emit(edge(1), edge(2), out);
      }
    }
  }

  void triangle(const std::array<std::size_t, 3>& c, std::vector<NodalSegment>& out) const {
    std::array<int, 3> cut{};
    int count = 0;
    for (int e = 0; e < 3; ++e) {
      if (sign(c[e]) != sign(c[(e + 1) % 3])) cut[count++] = e;
    }
    if (count == 2) {
      emit(crossing(c[cut[0]], c[(cut[0] + 1) % 3]), crossing(c[cut[1]], c[(cut[1] + 1) % 3]),
           out);
    }
  }

 private:
  const Grid& grid_;
  std::vector<double> v_;
};

double clip_to_ball(const NodalSegment& s, const Ball<2>& ball) {
  const Point2 d = s.b - s.a;
  const Point2 m = s.a - ball.center;
  const double a = d.squaredNorm();
  if (a == 0.0) return 0.0;
  const double b = 2.0 * d.dot(m);
  const double c = m.squaredNorm() - ball.radius * ball.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) return 0.0;
  const double root = std::sqrt(disc);
  const double t0 = std::max(0.0, (-b - root) / (2.0 * a));
  const double t1 = std::min(1.0, (-b + root) / (2.0 * a));
  return t1 > t0 ? (t1 - t0) * std::sqrt(a) : 0.0;
}

double clip_to_box(const NodalSegment& s, const Point2& lo, const Point2& hi) {
  const Point2 d = s.b - s.a;
  double t0 = 0.0, t1 = 1.0;
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (s.a[k] < lo[k] || s.a[k] > hi[k]) return 0.0;
      continue;
    }
    double ta = (lo[k] - s.a[k]) / d[k];
    double tb = (hi[k] - s.a[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t1 <= t0) return 0.0;
  }
  return (t1 - t0) * d.norm();
}

}  // namespace

NodalCurve extract_nodal_set(const ScalarField& u) {
  const Grid& g = u.grid();
  NodalCurve curve{g, {}, 0.0, 0, false};
  const double norm = u.max_abs();
  if (norm == 0.0) {
    curve.degenerate = true;
    return curve;
  }
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) {
    if (x == 0.0) {
      x = 1e-14 * norm;
      ++curve.perturbed_zeros;
    }
  }
  const Contourer c(g, std::move(v));
  auto& out = curve.segments;

  if (g.kind() == GridKind::Rectangle) {
    for (int j = 0; j + 1 < g.ny(); ++j) {
      for (int i = 0; i + 1 < g.nx(); ++i) {
        c.quad({g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)},
               out);
      }
    }
  } else {
    const int nt = g.ntheta();
    for (int j = 0; j < nt; ++j) c.triangle({0, g.index(1, j), g.index(1, j + 1)}, out);
    for (int i = 1; i < g.rings(); ++i) {
      for (int j = 0; j < nt; ++j) {
        c.quad({g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)},
               out);
      }
    }
  }
  for (const auto& s : out) curve.total_length += s.length();
  return curve;
}

double length_in_region(const NodalCurve& curve, const Ball<2>& ball) {
  double total = 0.0;
  for (const auto& s : curve.segments) total += clip_to_ball(s, ball);
  return total;
}

double length_in_region(const NodalCurve& curve, const Cube<2>& cube) {
  const Point2 lo = cube.lower(), hi = cube.upper();
  double total = 0.0;
  for (const auto& s : curve.segments) total += clip_to_box(s, lo, hi);
  return total;
}

std::size_t nearest_even_pair(const SteklovSpectrum& spectrum, double target) {
  std::size_t best = spectrum.pairs.size();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < spectrum.pairs.size(); ++n) {
    const auto& p = spectrum.pairs[n];
    if (p.parity != Parity::Even) continue;
    const double d = std::abs(p.eigenvalue - target);
    if (d < gap) {
      gap = d;
      best = n;
    }
  }
  if (best == spectrum.pairs.size()) {
    throw DegenerateInput("no even eigenpair in the computed spectrum");
  }
  return best;
}

EigenNodalLength nodal_length_of_eigenfunction(const SteklovSpectrum& spectrum, int k) {
  if (k < 0) throw InvalidArgument("nodal_length_of_eigenfunction: k must be >= 0");
  const auto& pair = spectrum.pairs[nearest_even_pair(spectrum, k)];
  EigenNodalLength out{k, pair.eigenvalue, 0.0, extract_nodal_set(pair.interior)};
  out.length = out.curve.total_length;
  return out;
}

EigenNodalLength nodal_length_of_eigenfunction(const Grid& disk, int k) {
  if (k < 0) throw InvalidArgument("nodal_length_of_eigenfunction: k must be >= 0");
  return nodal_length_of_eigenfunction(steklov_spectrum(disk, 2 * k + 3), k);
}

void write_curve_csv(const std::filesystem::path& path, const NodalCurve& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "x1,y1,x2,y2\n";
  for (const auto& s : curve.segments) {
    out << format_double(s.a.x()) << ',' << format_double(s.a.y()) << ','
        << format_double(s.b.x()) << ',' << format_double(s.b.y()) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_curve_svg(const std::filesystem::path& path, const NodalCurve& curve) {
  const Grid& g = curve.grid;
  double x0, x1, y0, y1;
  if (g.kind() == GridKind::Rectangle) {
    x0 = g.x_min(), x1 = g.x_max(), y0 = g.y_min(), y1 = g.y_max();
  } else {
    const double e = g.radial_extent();
    x0 = y0 = -e;
    x1 = y1 = e;
  }
  const double size = 600.0;
  const double scale = size / std::max(x1 - x0, y1 - y0);
  auto px = [&](double x) { return (x - x0) * scale; };
  auto py = [&](double y) { return (y1 - y) * scale; };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.1f\" height=\"%.1f\">\n",
                (x1 - x0) * scale, (y1 - y0) * scale);
  out << buf;
  if (g.kind() == GridKind::Rectangle) {
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"0\" y=\"0\" width=\"%.3f\" height=\"%.3f\" fill=\"none\" "
                  "stroke=\"#888\"/>\n",
                  (x1 - x0) * scale, (y1 - y0) * scale);
    out << buf;
  } else {
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\" fill=\"none\" stroke=\"#888\"/>\n",
                  px(0.0), py(0.0), g.radius() * scale);
    out << buf;
  }
  out << "<g stroke=\"#c00\" stroke-width=\"1.2\">\n";
  for (const auto& s : curve.segments) {
    std::snprintf(buf, sizeof buf, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n",
                  px(s.a.x()), py(s.a.y()), px(s.b.x()), py(s.b.y()));
    out << buf;
  }
  out << "</g>\n</svg>\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nodalab
