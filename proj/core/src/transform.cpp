#include "nodalab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nodalab/errors.hpp"
#include "nodalab/field_io.hpp"

namespace nodalab {

namespace {

double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_integral(double t) {
  const double t4 = t * t * t * t;
  return t4 * (2.5 + t * (-3.0 + t));
}
double smoothstep_derivative(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }

const Grid& require_plain_disk(const Grid& g, const char* who) {
  if (g.kind() != GridKind::Disk || g.is_extended()) {
    throw InvalidArgument(std::string(who) + ": needs a (non-extended) disk grid");
  }
  return g;
}

Point2 unit_radial(double theta) { return {std::cos(theta), std::sin(theta)}; }
Point2 unit_angular(double theta) { return {-std::sin(theta), std::cos(theta)}; }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Blended distance

BlendedDistance::BlendedDistance(const Grid& g, double collar)
    : radius_(require_plain_disk(g, "blended_distance").radius()),
      collar_(collar),
      seam_(radius_ - collar),
      delta_(g, std::vector<double>(g.node_count(), 0.0)),
      lap_(g, std::vector<double>(g.node_count(), 0.0)) {
  if (!(collar > 0.0) || !(collar < radius_)) {
    throw InvalidArgument("blended_distance: collar must lie in (0, R)");
  }
  std::vector<double> d(g.node_count()), l(g.node_count());
  grad_.resize(g.node_count());
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Point2 p = g.node(k);
    const double r = p.norm();
    d[k] = value(r);
    l[k] = laplacian(r);
    grad_[k] = gradient(p);
  }
  delta_ = ScalarField(g, std::move(d));
  lap_ = ScalarField(g, std::move(l));
}

double BlendedDistance::value(double r) const {
  if (r >= seam_) return radius_ - r;
  return collar_ + seam_ * (0.5 - smoothstep_integral(r / seam_));
}

double BlendedDistance::slope(double r) const {
  if (r >= seam_) return -1.0;
  return -smoothstep(r / seam_);
}

double BlendedDistance::curvature(double r) const {
  if (r >= seam_) return 0.0;
  return -smoothstep_derivative(r / seam_) / seam_;
}

double BlendedDistance::laplacian(double r) const {
  if (r <= 0.0) return 0.0;
  return curvature(r) + slope(r) / r;
}

Point2 BlendedDistance::gradient(const Point2& p) const {
  const double r = p.norm();
  if (r == 0.0) return Point2::Zero();
  return slope(r) * p / r;
}

BlendedDistance blended_distance(const Grid& disk, double collar) {
  return BlendedDistance(disk, collar);
}

ScalarField gauge_transform(const ScalarField& phi, double lambda, const BlendedDistance& delta) {
  if (!(phi.grid() == delta.field().grid())) {
    throw InvalidArgument("gauge_transform: phi and delta live on different grids");
  }
  if (std::abs(lambda) * delta.max_value() > 700.0) {
    throw InvalidArgument("gauge_transform: lambda * max(delta) exceeds 700");
  }
  std::vector<double> v(phi.values().begin(), phi.values().end());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= std::exp(lambda * delta.field().value(k));
  return ScalarField(phi.grid(), std::move(v), FieldTag::Gauged);
}

CoefficientSet drift_and_potential(double lambda, const BlendedDistance& delta) {
  const Grid& g = delta.field().grid();
  const std::size_t n = g.node_count();
  std::vector<Eigen::Matrix2d> a(n, Eigen::Matrix2d::Identity());
  std::vector<Point2> b(n);
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point2& grad = delta.gradient_field()[k];
    b[k] = -2.0 * lambda * grad;
    c[k] = lambda * lambda * grad.squaredNorm() - lambda * delta.laplacian_field().value(k);
  }
  return CoefficientSet(g, std::move(a), std::move(b), std::move(c));
}

// ---------------------------------------------------------------------------
// Doubling

double DoubledField::stretch(double r) const {
  const double big_r = radius();
  if (r <= big_r) return 1.0;
  return (2.0 * big_r - r) / r;
}

Eigen::Matrix2d DoubledField::metric(const Point2& p) const {
  const double r = p.norm();
  if (r == 0.0) return Eigen::Matrix2d::Identity();
  const Point2 er = p / r;
  const Point2 et(-er.y(), er.x());
  const double k = stretch(r);
  return er * er.transpose() + k * k * et * et.transpose();
}

Eigen::Matrix2d DoubledField::chart_a(const Point2& p) const {
  const double r = p.norm();
  const double al = alpha.eval(p);
  if (r == 0.0) return al * Eigen::Matrix2d::Identity();
  const Point2 er = p / r;
  const Point2 et(-er.y(), er.x());
  const double k = stretch(r);
  return al * (k * er * er.transpose() + (1.0 / k) * et * et.transpose());
}

Point2 DoubledField::chart_b(const Point2& p) const {
  const Point2 phys(b_x.eval(p), b_y.eval(p));
  const double r = p.norm();
  if (r == 0.0) return phys;
  const Point2 er = p / r;
  const Point2 et(-er.y(), er.x());
  return stretch(r) * phys.dot(er) * er + phys.dot(et) * et;
}

double DoubledField::chart_c(const Point2& p) const {
  return stretch(p.norm()) * potential.eval(p);
}

DoubledField double_across_boundary(const ScalarField& v, const CoefficientSet& coeffs,
                                    const DoublingOptions& options) {
  const Grid& g = require_plain_disk(v.grid(), "double_across_boundary");
  const CoefficientSet k =
      coeffs.grid() == g
          ? coeffs
          : CoefficientSet::from_functions(
                g, [&](const Point2& p) { return coeffs.a_at(p); },
                [&](const Point2& p) { return coeffs.b_at(p); },
                [&](const Point2& p) { return coeffs.c_at(p); });
  if (!k.is_isotropic()) throw InvalidArgument("double_across_boundary: needs isotropic a");

  const int nr = g.nr(), nt = g.ntheta();
  const double dr = g.dr(), dt = g.dtheta();
  const double big_r = g.radius();
  const double vmax = v.max_abs();

  double flux = 0.0;
  for (int j = 0; j < nt; ++j) {
    const double d = (3.0 * v.value(g.index(nr, j)) - 4.0 * v.value(g.index(nr - 1, j)) +
                      v.value(g.index(nr - 2, j))) /
                     (2.0 * dr);
    flux = std::max(flux, std::abs(d));
  }
  const double rel_flux = vmax > 0.0 ? flux / vmax : 0.0;
  if (rel_flux > options.neumann_tolerance) {
    std::ostringstream os;
    os << "double_across_boundary: boundary flux " << rel_flux << " exceeds tolerance "
       << options.neumann_tolerance;
    throw PreconditionError(os.str(), rel_flux);
  }

  const Grid g2 = Grid::extended_disk(big_r, nr, nt, nr);
  const std::size_t n2 = g2.node_count();
  std::vector<double> val(n2), al(n2), bx(n2), by(n2), q(n2);
  for (std::size_t n = 0; n < n2; ++n) {
    const auto [i, j] = g2.ij(n);
    const bool mirrored = i > nr;
    const std::size_t src = g.index(mirrored ? 2 * nr - i : i, j);
    val[n] = v.value(src);
    al[n] = k.a(src)(0, 0);
    q[n] = k.c(src);
    const Point2& b = k.b(src);
    if (i == 0) {
      bx[n] = b.x();
      by[n] = b.y();
      continue;
    }
    const double th = g2.theta(j);
    double br = b.dot(unit_radial(th));
    const double bt = b.dot(unit_angular(th));
    if (mirrored) br = -br;
    if (i == nr) br = 0.0;
    const Point2 phys = br * unit_radial(th) + bt * unit_angular(th);
    bx[n] = phys.x();
    by[n] = phys.y();
  }

  DoubledField out{ScalarField(g2, val, v.tag()), ScalarField(g2, al), ScalarField(g2, bx),
                   ScalarField(g2, by), ScalarField(g2, q)};
  out.neumann_flux = rel_flux;

  auto rho = [big_r](double r) { return r <= big_r ? r : 2.0 * big_r - r; };
  double worst = 0.0, worst_seam = 0.0, worst_interior = 0.0;
  for (int i = 1; i < 2 * nr; ++i) {
    const double r = g2.ring_radius(i);
    const double rc = rho(r), rp = rho(r + 0.5 * dr), rm = rho(r - 0.5 * dr);
    for (int j = 0; j < nt; ++j) {
      const std::size_t c = g2.index(i, j);
      const std::size_t o = g2.index(i + 1, j), in = g2.index(i - 1, j);
      const std::size_t up = g2.index(i, j + 1), dn = g2.index(i, j - 1);
      const double ap = 0.5 * (al[c] + al[o]), am = 0.5 * (al[c] + al[in]);
      const double tp = 0.5 * (al[c] + al[up]), tm = 0.5 * (al[c] + al[dn]);
      double res = (rp * ap * (val[o] - val[c]) - rm * am * (val[c] - val[in])) / (rc * dr * dr);
      res += (tp * (val[up] - val[c]) - tm * (val[c] - val[dn])) / (rc * rc * dt * dt);
      const double th = g2.theta(j);
      const Point2 phys(bx[c], by[c]);
      res += phys.dot(unit_radial(th)) * (val[o] - val[in]) / (2.0 * dr);
      res += phys.dot(unit_angular(th)) * (val[up] - val[dn]) / (2.0 * rc * dt);
      res += q[c] * val[c];
      const double rel = vmax > 0.0 ? std::abs(res) / vmax : std::abs(res);
      worst = std::max(worst, rel);
      if (i == nr) {
        worst_seam = std::max(worst_seam, rel);
      } else {
        worst_interior = std::max(worst_interior, rel);
      }
    }
  }
  out.residual = worst;
  out.residual_seam = worst_seam;
  out.residual_interior = worst_interior;
  return out;
}

double seam_metric_lipschitz(const DoubledField& d) {
  const Grid& g = d.values.grid();
  const int nr = g.nr();
  double worst = 0.0;
  for (int j = 0; j < g.ntheta(); ++j) {
    for (int i : {nr - 1, nr}) {
      const Point2 x = g.node(g.index(i, j));
      const Point2 y = g.node(g.index(i + 1, j));
      const double q = (d.metric(x) - d.metric(y)).cwiseAbs().sum() / (x - y).norm();
      worst = std::max(worst, q);
    }
  }
  return worst;
}

RescaledField rescale_to_wavelength(const DoubledField& d, const Point2& x0, double lambda,
                                    int nr, int ntheta) {
  if (!(lambda > 0.0)) throw InvalidArgument("rescale_to_wavelength: lambda must be positive");
  const Grid& chart = d.values.grid();
  check_ball_inside(chart, Ball<2>{x0, 1.0 / lambda}, "rescale_to_wavelength");

  const Grid unit = Grid::disk(1.0, nr, ntheta);
  const std::size_t n = unit.node_count();
  std::vector<double> w(n), c(n);
  std::vector<Eigen::Matrix2d> a(n);
  std::vector<Point2> b(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point2 p = x0 + unit.node(k) / lambda;
    w[k] = d.values.eval(p);
    a[k] = d.chart_a(p);
    b[k] = d.chart_b(p) / lambda;
    c[k] = d.chart_c(p) / (lambda * lambda);
  }
  CoefficientSet coeffs(unit, std::move(a), std::move(b), std::move(c));
  const Bounds bounds = verify_conditions(coeffs);
  coeffs.set_measured(bounds);
  double lower = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    lower = std::max(lower, coeffs.b(k).cwiseAbs().sum() + std::abs(coeffs.c(k)));
  }
  return {ScalarField(unit, std::move(w), FieldTag::Rescaled), std::move(coeffs), bounds, lower};
}

double metric_distance_check(const DoubledField& d,
                             const std::vector<std::pair<Point2, Point2>>& pairs,
                             double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("metric_distance_check: lambda must be positive");
  const Grid& chart = d.values.grid();
  constexpr int kPieces = 256;
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const double dist = (y - x).norm();
    if (dist == 0.0) throw InvalidArgument("metric_distance_check: coincident points");
    if (dist > 2.0 / lambda * (1.0 + 1e-12)) {
      throw InvalidArgument("metric_distance_check: pair does not fit a ball of radius 1/lambda");
    }
    if (!chart.contains(x) || !chart.contains(y)) {
      throw OutOfDomain("metric_distance_check: point outside the chart");
    }
    const Point2 step = (y - x) / kPieces;
    double len = 0.0;
    for (int k = 0; k < kPieces; ++k) {
      const Point2 mid = x + (k + 0.5) * step;
      len += std::sqrt(step.dot(d.metric(mid) * step));
    }
    worst = std::max(worst, len / dist);
  }
  return worst;
}

CoefficientNorms coefficient_norms(const DoubledField& d, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("coefficient_norms: lambda must be positive");
  CoefficientNorms out;
  double bmax = 0.0, qmax = 0.0, gb = 0.0, gq = 0.0;
  const auto& gbx = d.b_x.nodal_gradient();
  const auto& gby = d.b_y.nodal_gradient();
  const auto& gqq = d.potential.nodal_gradient();
  for (std::size_t k = 0; k < d.values.grid().node_count(); ++k) {
    bmax = std::max(bmax, std::hypot(d.b_x.value(k), d.b_y.value(k)));
    qmax = std::max(qmax, std::abs(d.potential.value(k)));
    gb = std::max(gb, std::sqrt(gbx[k].squaredNorm() + gby[k].squaredNorm()));
    gq = std::max(gq, gqq[k].norm());
  }
  out.b_over_lambda = bmax / lambda;
  out.q_over_lambda2 = qmax / (lambda * lambda);
  out.grad_b_over_lambda2 = gb / (lambda * lambda);
  out.grad_q_over_lambda3 = gq / (lambda * lambda * lambda);
  return out;
}

PipelineResult run_transform_pipeline(const ScalarField& phi, double lambda, const Point2& x0,
                                      double collar, const DoublingOptions& options) {
  const BlendedDistance delta = blended_distance(phi.grid(), collar);
  ScalarField v = gauge_transform(phi, lambda, delta);
  const CoefficientSet k = drift_and_potential(lambda, delta);
  DoubledField doubled = double_across_boundary(v, k, options);
  RescaledField rescaled = rescale_to_wavelength(doubled, x0, lambda);
  const CoefficientNorms norms = coefficient_norms(doubled, lambda);
  const double lip = seam_metric_lipschitz(doubled);

  std::size_t mismatches = 0;
  for (std::size_t n = 0; n < phi.grid().node_count(); ++n) {
    const double p = phi.value(n);
    if (p != 0.0 && std::signbit(p) != std::signbit(v.value(n))) ++mismatches;
  }
  return {lambda, x0, phi, std::move(v), std::move(doubled), std::move(rescaled), norms, lip,
          mismatches};
}

void write_pipeline_dump(const std::filesystem::path& dir, const PipelineResult& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_field_csv(dir / "phi.csv", r.phi);
  write_field_csv(dir / "gauged.csv", r.v);
  write_field_csv(dir / "doubled.csv", r.doubled.values);
  write_field_csv(dir / "rescaled.csv", r.rescaled.field);

  std::ofstream m(dir / "manifest");
  if (!m) throw IoError("cannot open " + (dir / "manifest").string());
  m << "lambda " << format_double(r.lambda) << "\n";
  m << "x0 " << format_double(r.x0.x()) << " " << format_double(r.x0.y()) << "\n";
  m << "gauge sign_mismatches " << r.sign_mismatches << "\n";
  m << "double neumann_flux " << format_double(r.doubled.neumann_flux) << "\n";
  m << "double residual " << format_double(r.doubled.residual) << "\n";
  m << "double residual_seam " << format_double(r.doubled.residual_seam) << "\n";
  m << "double residual_interior " << format_double(r.doubled.residual_interior) << "\n";
  m << "double seam_lipschitz " << format_double(r.seam_lipschitz) << "\n";
  m << "bounds b_over_lambda " << format_double(r.norms.b_over_lambda) << "\n";
  m << "bounds q_over_lambda2 " << format_double(r.norms.q_over_lambda2) << "\n";
  m << "bounds grad_b_over_lambda2 " << format_double(r.norms.grad_b_over_lambda2) << "\n";
  m << "bounds grad_q_over_lambda3 " << format_double(r.norms.grad_q_over_lambda3) << "\n";
  m << "rescale eta " << format_double(r.rescaled.bounds.eta) << "\n";
  m << "rescale Lambda " << format_double(r.rescaled.bounds.Lambda) << "\n";
  m << "rescale lower_order " << format_double(r.rescaled.lower_order_bound) << "\n";
  m << "files phi.csv gauged.csv doubled.csv rescaled.csv\n";
  if (!m) throw IoError("write failed: " + (dir / "manifest").string());
}

}  // namespace nodalab
