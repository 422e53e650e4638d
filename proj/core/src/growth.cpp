#include "nodalab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nodalab/errors.hpp"

namespace nodalab {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_power_of_two(double t) {
  if (t < 2.0 || t != std::floor(t) || t > 1 << 30) return false;
  const auto n = static_cast<unsigned>(t);
  return (n & (n - 1)) == 0;
}

std::size_t find_radius(const FrequencyProfile& p, double r, const char* who) {
  for (std::size_t k = 0; k < p.r.size(); ++k) {
    if (std::abs(p.r[k] - r) <= 1e-9 * r) return k;
  }
  std::ostringstream os;
  os << who << ": radius " << r << " is not a profile sample";
  throw InvalidArgument(os.str());
}

}  // namespace

DoublingReport doubling_index(const ScalarField& u, const Point2& x, double r,
                              const SupSampling& sampling) {
  const double floor_r = 4.0 * u.grid().spacing();
  if (!(r >= floor_r * (1.0 - 1e-12))) {
    std::ostringstream os;
    os << "doubling_index: radius " << r << " is below 4h = " << floor_r;
    throw InvalidArgument(os.str());
  }
  const auto [inner, outer] = sup_abs_inner_outer(u, x, r, 2, sampling);
  if (!(inner > 0.0)) {
    throw DegenerateInput("doubling_index: u vanishes on B(x, r)");
  }
  return {x, r, std::log2(outer / inner), inner, outer};
}

CubeIndexReport uniform_doubling_index(const ScalarField& u, const Cube<2>& cube,
                                       const CubeLattice& lattice) {
  if (lattice.centers_per_axis < 1 || lattice.radii < 1) {
    throw InvalidArgument("uniform_doubling_index: lattice needs >= 1 center and radius");
  }
  const Grid& g = u.grid();
  const double h = g.spacing();
  const double r_lo = 4.0 * h, r_hi = cube.diameter();
  if (!(r_hi > r_lo)) {
    throw DegenerateInput("uniform_doubling_index: cube diameter is below 4h");
  }
  const int m = lattice.centers_per_axis, k = lattice.radii;
  const double log_lo = std::log(r_lo), log_step = std::log(r_hi / r_lo) / (k + 1);

  CubeIndexReport rep{cube};
  rep.N = -std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Point2& x, double r) -> std::optional<double> {
    if (!g.contains_ball(Ball<2>{x, 2.0 * r})) return std::nullopt;
    try {
      return doubling_index(u, x, r).N;
    } catch (const DegenerateInput&) {
      return std::nullopt;
    }
  };

  const Point2 lo = cube.lower();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const Point2 x =
          m == 1 ? cube.center
                 : Point2(lo.x() + cube.side * i / (m - 1), lo.y() + cube.side * j / (m - 1));
      for (int q = 1; q <= k; ++q) {
        const double r = std::exp(log_lo + q * log_step);
        const auto n = evaluate(x, r);
        if (!n) {
          ++rep.clipped;
          continue;
        }
        ++rep.admissible;
        if (*n > rep.N) {
          rep.N = *n;
          rep.argmax_center = x;
          rep.argmax_radius = r;
        }
      }
    }
  }
  if (rep.admissible == 0) {
    throw DegenerateInput("uniform_doubling_index: no admissible (center, radius) sample");
  }

  if (lattice.refine) {
    const double s_min = log_lo + log_step, s_max = log_lo + k * log_step;
    double dx = m == 1 ? cube.side / 4.0 : cube.side / (m - 1) / 2.0;
    double ds = log_step / 2.0;
    Point2 x = rep.argmax_center;
    double s = std::log(rep.argmax_radius);
    int evals = 0;
    constexpr int kMaxEvals = 400;
    while (dx >= h / 4.0 && evals < kMaxEvals) {
      bool improved = false;
      const std::array<std::array<double, 3>, 6> moves{{{dx, 0, 0},
                                                         {-dx, 0, 0},
                                                         {0, dx, 0},
                                                         {0, -dx, 0},
                                                         {0, 0, ds},
                                                         {0, 0, -ds}}};
      for (const auto& mv : moves) {
        const Point2 xc(x.x() + mv[0], x.y() + mv[1]);
        const double sc = s + mv[2];
        if (!cube.contains(xc) || sc < s_min - 1e-12 || sc > s_max + 1e-12) continue;
        ++evals;
        const auto n = evaluate(xc, std::exp(sc));
        if (n && *n > rep.N + 1e-12) {
          rep.N = *n;
          x = xc;
          s = sc;
          rep.argmax_center = xc;
          rep.argmax_radius = std::exp(sc);
          improved = true;
        }
      }
      if (!improved) {
        dx /= 2.0;
        ds /= 2.0;
      }
    }
    rep.refine_steps = evals;
  }
  return rep;
}

FrequencyProfile frequency_profile(const ScalarField& u, const CoefficientSet& coeffs,
                                   const Point2& center, double r_min, double r_max,
                                   int samples) {
  if (samples < 2 || !(r_min > 0.0) || !(r_max > r_min)) {
    throw InvalidArgument("frequency_profile: needs 0 < r_min < r_max and >= 2 samples");
  }
  check_ball_inside(u.grid(), Ball<2>{center, r_max}, "frequency_profile");
  const ScalarField grad_density = integrand_density(u, GradSquareIntegrand{});
  const ScalarField freq_density = integrand_density(u, FrequencyIntegrand{&coeffs});

  FrequencyProfile p;
  p.center = center;
  p.harmonic = !coeffs.has_lower_order_terms();
  for (int k = 0; k < samples; ++k) {
    const double r = k == samples - 1
                         ? r_max
                         : r_min * std::pow(r_max / r_min, static_cast<double>(k) / (samples - 1));
    const double h = sphere_integral(u, center, r);
    if (!(h > 0.0)) {
      std::ostringstream os;
      os << "frequency_profile: H vanishes at r = " << r;
      throw DegenerateInput(os.str());
    }
    const double d = integrate_density_over_ball(grad_density, Ball<2>{center, r});
    const double i = integrate_density_over_ball(freq_density, Ball<2>{center, r});
    p.r.push_back(r);
    p.H.push_back(h);
    p.D.push_back(d);
    p.I.push_back(i);
    p.beta.push_back(r * i / h);
  }
  return p;
}

AlmostMonotonicityReport check_almost_monotonicity(const FrequencyProfile& p,
                                                   std::optional<double> r0_max) {
  const std::size_t n = p.beta.size();
  if (n < 3) throw InvalidArgument("check_almost_monotonicity: needs >= 3 samples");
  AlmostMonotonicityReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      rep.max_violation = std::max(rep.max_violation, p.beta[i] - p.beta[j]);
    }
  }
  rep.best_c2 = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= 10; ++m) {
    const double eps = 0.05 * m;
    double c2 = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      if (r0_max && p.r[j] > *r0_max * (1.0 + 1e-12)) continue;
      for (std::size_t i = 0; i < j; ++i) {
        c2 = std::max(c2, p.beta[i] - (1.0 + eps) * p.beta[j]);
      }
    }
    rep.eps.push_back(eps);
    rep.c2.push_back(c2);
    if (c2 < rep.best_c2) {
      rep.best_c2 = c2;
      rep.best_c3 = 1.0 + eps;
    }
  }
  return rep;
}

HGrowthReport check_H_growth(const FrequencyProfile& p, double r1, double r2, double c2,
                             double c3) {
  if (!(r1 < r2)) throw InvalidArgument("check_H_growth: needs R1 < R2");
  if (!(c3 > 0.0)) throw InvalidArgument("check_H_growth: c3 must be positive");
  const std::size_t i1 = find_radius(p, r1, "check_H_growth");
  const std::size_t i2 = find_radius(p, r2, "check_H_growth");
  HGrowthReport rep;
  rep.ratio = p.H[i2] / p.H[i1];

  double integral = 0.0;
  for (std::size_t k = i1; k < i2; ++k) {
    integral += 0.5 * (p.beta[k] + p.beta[k + 1]) * std::log(p.r[k + 1] / p.r[k]);
  }
  const double span = std::log(p.r[i2] / p.r[i1]);
  rep.identity_predicted = (p.r[i2] / p.r[i1]) * std::exp(2.0 * integral);
  rep.identity_rel_error = std::abs(rep.ratio / rep.identity_predicted - 1.0);

  for (std::size_t k = 0; k + 1 < p.r.size(); ++k) {
    const double a = p.H[k] / p.r[k], b = p.H[k + 1] / p.r[k + 1];
    rep.max_h_over_r_drop = std::max(rep.max_h_over_r_drop, (a - b) / a);
  }

  rep.growth_exponent = std::log(rep.ratio) / span;
  rep.lower_exponent = (p.beta[i1] - c2) / c3;
  rep.upper_exponent = 2.0 * (c3 * p.beta[i2] + c2);
  rep.log_c5 = std::max(0.0, std::log(rep.ratio) - rep.upper_exponent * span);
  rep.lower_holds = rep.growth_exponent >= rep.lower_exponent;
  return rep;
}

SandwichReport check_doubling_sandwich(const ScalarField& u, const Point2& x, double rho,
                                       double t, double eps, double c6,
                                       const SupSampling& sampling) {
  if (!(t > 2.0)) throw InvalidArgument("check_doubling_sandwich: needs t > 2");
  if (!(rho > 0.0)) throw InvalidArgument("check_doubling_sandwich: rho must be positive");
  check_ball_inside(u.grid(), Ball<2>{x, t * rho}, "check_doubling_sandwich");

  double inner = 0.0, outer = 0.0;
  if (is_power_of_two(t)) {
    std::tie(inner, outer) = sup_abs_inner_outer(u, x, rho, static_cast<int>(t), sampling);
  } else {
    inner = sup_abs_on_ball(u, Ball<2>{x, rho}, sampling);
    outer = sup_abs_on_ball(u, Ball<2>{x, t * rho}, sampling);
  }
  if (!(inner > 0.0)) throw DegenerateInput("check_doubling_sandwich: u vanishes on B(x, rho)");

  SandwichReport rep;
  rep.ratio = outer / inner;
  rep.N_rho = doubling_index(u, x, rho, sampling).N;
  if (u.grid().contains_ball(Ball<2>{x, 2.0 * t * rho})) {
    rep.N_t_rho = doubling_index(u, x, t * rho, sampling).N;
  }
  rep.growth = std::log(rep.ratio) / std::log(t);
  rep.lower_exponent = rep.N_rho * (1.0 - eps) - c6;
  rep.upper_exponent = rep.N_rho * (1.0 + eps) + c6;
  rep.lower_margin = rep.growth - rep.lower_exponent;
  rep.upper_margin = rep.upper_exponent - rep.growth;
  rep.satisfied = rep.lower_margin >= -1e-12 && rep.upper_margin >= -1e-12;
  return rep;
}

NearbyReport compare_nearby(const ScalarField& u, const Point2& x1, const Point2& x2,
                            double rho, double c15) {
  if (!((x1 - x2).norm() < rho)) {
    throw InvalidArgument("compare_nearby: needs |x1 - x2| < rho");
  }
  NearbyReport rep;
  rep.N1 = doubling_index(u, x1, rho).N;
  rep.N2 = doubling_index(u, x2, c15 * rho).N;
  rep.holds = rep.N2 > 0.99 * rep.N1;
  return rep;
}

BarycenterReport barycenter_test(const ScalarField& u, const Simplex<2>& simplex, double c) {
  if (relative_width(simplex) <= 0.0) throw DegenerateInput("barycenter_test: degenerate simplex");
  if (!(c > 0.0)) throw InvalidArgument("barycenter_test: C must be positive");
  const double diam = simplex.diameter();
  BarycenterReport rep;
  for (int k = 0; k < 3; ++k) {
    rep.vertex_N[k] = doubling_index(u, simplex.vertices[k], diam / 4.0).N;
  }
  rep.N_min = *std::min_element(rep.vertex_N.begin(), rep.vertex_N.end());
  rep.N_barycenter = doubling_index(u, barycenter(simplex), c * diam).N;
  if (rep.N_min <= 1e-12) {
    rep.degenerate = true;
    rep.gain = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.gain = rep.N_barycenter / rep.N_min;
  }
  return rep;
}

BadCubeCount count_bad_subcubes(const ScalarField& u, const Cube<2>& cube, int parts,
                                double threshold, const CubeLattice& lattice,
                                const std::optional<Hyperplane>& plane) {
  if (parts < 2) throw InvalidArgument("count_bad_subcubes: needs A >= 2");
  if (!(threshold > 0.0)) throw InvalidArgument("count_bad_subcubes: threshold must be positive");
  if (plane && plane->normal.norm() == 0.0) {
    throw InvalidArgument("count_bad_subcubes: hyperplane normal must be nonzero");
  }
  BadCubeCount out;
  const auto cubes = subdivide_cube(cube, parts);
  for (std::size_t k = 0; k < cubes.size(); ++k) {
    const auto idx = subcube_index<2>(k, parts);
    SubcubeEntry e{idx[0], idx[1], cubes[k], uniform_doubling_index(u, cubes[k], lattice)};
    if (plane) {
      const double reach = 0.5 * cubes[k].side * plane->normal.cwiseAbs().sum();
      e.meets_plane = std::abs(plane->normal.dot(cubes[k].center) - plane->offset) <= reach;
    }
    e.bad = e.meets_plane && e.report.N >= threshold;
    if (e.bad) ++out.count;
    out.entries.push_back(std::move(e));
  }
  return out;
}

void write_profile_csv(const std::filesystem::path& path, const FrequencyProfile& p) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "r,H,D,I,beta\n";
  for (std::size_t k = 0; k < p.r.size(); ++k) {
    out << format_double(p.r[k]) << ',' << format_double(p.H[k]) << ','
        << format_double(p.D[k]) << ',' << format_double(p.I[k]) << ','
        << format_double(p.beta[k]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_cube_report_csv(const std::filesystem::path& path, const BadCubeCount& count) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "i,j,cx,cy,N\n";
  for (const auto& e : count.entries) {
    out << e.i << ',' << e.j << ',' << format_double(e.cube.center.x()) << ','
        << format_double(e.cube.center.y()) << ',' << format_double(e.report.N) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nodalab
