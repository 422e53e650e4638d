#include "nodalab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include <Eigen/SparseLU>

#include "nodalab/errors.hpp"
#include "nodalab/field_io.hpp"
#include "nodalab/jacobi.hpp"

namespace nodalab {

namespace detail {

struct Factorization {
  std::once_flag once;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

}  // namespace detail

namespace {

constexpr double kPi = std::numbers::pi;

using Triplets = std::vector<Eigen::Triplet<double>>;

// Accumulates one operator row, split into interior and boundary columns.
struct RowWriter {
  const std::vector<long>& slot;  // >= 0: interior index, < 0: -(boundary index) - 1
  Triplets& ii;
  Triplets& ib;
  long row = 0;

  void add(std::size_t node, double w) const {
    if (w == 0.0) return;
    const long s = slot[node];
    if (s >= 0) {
      ii.emplace_back(row, s, w);
    } else {
      ib.emplace_back(row, -s - 1, w);
    }
  }
};

void cartesian_row(const Grid& g, const CoefficientSet& k, int i, int j, const RowWriter& w) {
  const double hx = g.hx(), hy = g.hy();
  const std::size_t c = g.index(i, j);
  const std::size_t e = g.index(i + 1, j), wst = g.index(i - 1, j);
  const std::size_t n = g.index(i, j + 1), s = g.index(i, j - 1);
  const std::size_t ne = g.index(i + 1, j + 1), nw = g.index(i - 1, j + 1);
  const std::size_t se = g.index(i + 1, j - 1), sw = g.index(i - 1, j - 1);

  const double ae = 0.5 * (k.a(c)(0, 0) + k.a(e)(0, 0));
  const double aw = 0.5 * (k.a(c)(0, 0) + k.a(wst)(0, 0));
  const double an = 0.5 * (k.a(c)(1, 1) + k.a(n)(1, 1));
  const double as = 0.5 * (k.a(c)(1, 1) + k.a(s)(1, 1));
  w.add(e, ae / (hx * hx));
  w.add(wst, aw / (hx * hx));
  w.add(n, an / (hy * hy));
  w.add(s, as / (hy * hy));
  w.add(c, -(ae + aw) / (hx * hx) - (an + as) / (hy * hy) + k.c(c));

  // d_x(a12 d_y u) + d_y(a21 d_x u), both by nested central differences.
  const double q = 1.0 / (4.0 * hx * hy);
  const double a12e = k.a(e)(0, 1), a12w = k.a(wst)(0, 1);
  const double a21n = k.a(n)(1, 0), a21s = k.a(s)(1, 0);
  w.add(ne, q * (a12e + a21n));
  w.add(se, q * (-a12e - a21s));
  w.add(nw, q * (-a12w - a21n));
  w.add(sw, q * (a12w + a21s));

  const Point2& b = k.b(c);
  w.add(e, b.x() / (2 * hx));
  w.add(wst, -b.x() / (2 * hx));
  w.add(n, b.y() / (2 * hy));
  w.add(s, -b.y() / (2 * hy));
}

void polar_row(const Grid& g, const CoefficientSet& k, int i, int j, const RowWriter& w) {
  const double dr = g.dr(), dt = g.dtheta();
  const std::size_t c = g.index(i, j);
  auto alpha = [&k](std::size_t node) { return k.a(node)(0, 0); };

  if (i == 0) {
    const int nt = g.ntheta();
    const double flux = 2.0 * dt / (kPi * dr * dr);
    const Point2& b = k.b(0);
    double diag = k.c(0);
    for (int jj = 0; jj < nt; ++jj) {
      const std::size_t r1 = g.index(1, jj);
      const double af = 0.5 * (alpha(0) + alpha(r1));
      const double th = g.theta(jj);
      const double grad_w = 2.0 / (nt * dr) * (b.x() * std::cos(th) + b.y() * std::sin(th));
      w.add(r1, flux * af + grad_w);
      diag -= flux * af;
    }
    w.add(c, diag);
    return;
  }

  const double r = g.ring_radius(i);
  const double rp = r + 0.5 * dr, rm = r - 0.5 * dr;
  const std::size_t out = g.index(i + 1, j), in = g.index(i - 1, j);
  const std::size_t up = g.index(i, j + 1), dn = g.index(i, j - 1);
  const double ap = 0.5 * (alpha(c) + alpha(out));
  const double am = 0.5 * (alpha(c) + alpha(in));
  const double tp = 0.5 * (alpha(c) + alpha(up));
  const double tm = 0.5 * (alpha(c) + alpha(dn));
  const double radial = 1.0 / (r * dr * dr);
  const double angular = 1.0 / (r * r * dt * dt);
  w.add(out, rp * ap * radial);
  w.add(in, rm * am * radial);
  w.add(up, tp * angular);
  w.add(dn, tm * angular);
  w.add(c, -(rp * ap + rm * am) * radial - (tp + tm) * angular + k.c(c));

  const double th = g.theta(j);
  const Point2& b = k.b(c);
  const double br = b.x() * std::cos(th) + b.y() * std::sin(th);
  const double bt = -b.x() * std::sin(th) + b.y() * std::cos(th);
  w.add(out, br / (2 * dr));
  w.add(in, -br / (2 * dr));
  w.add(up, bt / (2 * r * dt));
  w.add(dn, -bt / (2 * r * dt));
}

double relative_residual(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& rhs) {
  const double rn = rhs.norm();
  const double res = (a * x - rhs).norm();
  return rn > 0.0 ? res / rn : res;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

DiscreteOperator::DiscreteOperator(CoefficientSet coeffs, std::vector<std::size_t> interior,
                                   std::vector<std::size_t> boundary,
                                   Eigen::SparseMatrix<double> a_ii,
                                   Eigen::SparseMatrix<double> a_ib)
    : coeffs_(std::move(coeffs)),
      interior_(std::move(interior)),
      boundary_(std::move(boundary)),
      a_ii_(std::move(a_ii)),
      a_ib_(std::move(a_ib)),
      factor_(std::make_shared<detail::Factorization>()) {}

Eigen::VectorXd DiscreteOperator::apply(const ScalarField& u) const {
  if (!(u.grid() == grid())) throw InvalidArgument("apply: field grid differs from operator grid");
  Eigen::VectorXd ui(interior_.size()), ub(boundary_.size());
  for (std::size_t k = 0; k < interior_.size(); ++k) ui(k) = u.value(interior_[k]);
  for (std::size_t k = 0; k < boundary_.size(); ++k) ub(k) = u.value(boundary_[k]);
  return a_ii_ * ui + a_ib_ * ub;
}

const detail::Factorization& DiscreteOperator::factorization() const {
  std::call_once(factor_->once, [this] {
    factor_->lu.analyzePattern(a_ii_);
    factor_->lu.factorize(a_ii_);
  });
  if (factor_->lu.info() != Eigen::Success) {
    throw SolverFailure("solve_dirichlet: sparse LU factorization failed: " +
                            factor_->lu.lastErrorMessage(),
                        std::numeric_limits<double>::infinity());
  }
  return *factor_;
}

Eigen::MatrixXd DiscreteOperator::solve_many(const Eigen::MatrixXd& boundary_values) const {
  if (boundary_values.rows() != static_cast<Eigen::Index>(boundary_.size())) {
    throw InvalidArgument("solve_dirichlet: boundary data size does not match the grid");
  }
  if (!boundary_values.allFinite()) throw InvalidArgument("solve_dirichlet: non-finite data");
  const auto& f = factorization();
  const Eigen::MatrixXd rhs = -(a_ib_ * boundary_values);
  const Eigen::MatrixXd x = f.lu.solve(rhs);

  double worst = 0.0;
  for (Eigen::Index col = 0; col < rhs.cols(); ++col) {
    worst = std::max(worst, relative_residual(a_ii_, x.col(col), rhs.col(col)));
  }
  if (!(worst <= 1e-10)) {
    std::ostringstream os;
    os << "solve_dirichlet: relative residual " << worst << " exceeds 1e-10";
    throw SolverFailure(os.str(), worst);
  }

  Eigen::MatrixXd out(grid().node_count(), boundary_values.cols());
  for (std::size_t k = 0; k < interior_.size(); ++k) out.row(interior_[k]) = x.row(k);
  for (std::size_t k = 0; k < boundary_.size(); ++k) {
    out.row(boundary_[k]) = boundary_values.row(k);
  }
  return out;
}

DiscreteOperator assemble(const CoefficientSet& coeffs, const Grid& grid) {
  if (coeffs.grid() == grid) return assemble(coeffs);
  return assemble(CoefficientSet::from_functions(
      grid, [&](const Point2& p) { return coeffs.a_at(p); },
      [&](const Point2& p) { return coeffs.b_at(p); },
      [&](const Point2& p) { return coeffs.c_at(p); }));
}

DiscreteOperator assemble(const CoefficientSet& coeffs) {
  const Grid& g = coeffs.grid();
  const Bounds bounds = verify_conditions(coeffs);
  if (!(bounds.eta > 0.0)) {
    std::ostringstream os;
    os << "assemble: coefficients are not uniformly elliptic (eta = " << bounds.eta << ")";
    throw NonElliptic(os.str());
  }
  if (g.kind() == GridKind::Disk) {
    if (g.is_extended()) throw InvalidArgument("assemble: extended disk grids are not supported");
    if (!coeffs.is_isotropic()) {
      throw InvalidArgument("assemble: polar grids support isotropic a = alpha I only");
    }
  }

  CoefficientSet k = coeffs;
  k.set_measured(bounds);

  std::vector<std::size_t> interior, boundary;
  std::vector<long> slot(g.node_count());
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (g.is_boundary_node(n)) {
      slot[n] = -static_cast<long>(boundary.size()) - 1;
      boundary.push_back(n);
    } else {
      slot[n] = static_cast<long>(interior.size());
      interior.push_back(n);
    }
  }

  Triplets ii, ib;
  ii.reserve(interior.size() * 9);
  for (std::size_t row = 0; row < interior.size(); ++row) {
    const RowWriter w{slot, ii, ib, static_cast<long>(row)};
    const auto [i, j] = g.ij(interior[row]);
    if (g.kind() == GridKind::Rectangle) {
      cartesian_row(g, k, i, j, w);
    } else {
      polar_row(g, k, i, j, w);
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior.size());
  const auto nb = static_cast<Eigen::Index>(boundary.size());
  Eigen::SparseMatrix<double> a_ii(ni, ni), a_ib(ni, nb);
  a_ii.setFromTriplets(ii.begin(), ii.end());
  a_ib.setFromTriplets(ib.begin(), ib.end());
  a_ii.makeCompressed();
  a_ib.makeCompressed();
  return DiscreteOperator(std::move(k), std::move(interior), std::move(boundary), std::move(a_ii),
                          std::move(a_ib));
}

ScalarField solve_dirichlet(const DiscreteOperator& op, const std::vector<double>& boundary,
                            FieldTag tag) {
  Eigen::MatrixXd data(boundary.size(), 1);
  for (std::size_t k = 0; k < boundary.size(); ++k) data(k, 0) = boundary[k];
  const Eigen::MatrixXd x = op.solve_many(data);
  return ScalarField(op.grid(), std::vector<double>(x.data(), x.data() + x.rows()), tag);
}

ScalarField solve_dirichlet(const DiscreteOperator& op,
                            const std::function<double(const Point2&)>& boundary, FieldTag tag) {
  std::vector<double> data;
  data.reserve(op.boundary_nodes().size());
  for (std::size_t n : op.boundary_nodes()) data.push_back(boundary(op.grid().node(n)));
  return solve_dirichlet(op, data, tag);
}

// ---------------------------------------------------------------------------
// Dirichlet-to-Neumann map and Steklov spectrum

DtnMatrix dtn_matrix(const Grid& g) {
  if (g.kind() != GridKind::Disk || g.is_extended()) {
    throw InvalidArgument("dtn_matrix: needs a (non-extended) disk grid");
  }
  const DiscreteOperator op = assemble(CoefficientSet::laplace(g));
  const int nt = g.ntheta(), nr = g.nr();
  const double dr = g.dr();
  Eigen::MatrixXd m(nt, nt);

  // Hat-function extensions are solved in blocks to bound memory.
  constexpr int kBlock = 64;
  for (int j0 = 0; j0 < nt; j0 += kBlock) {
    const int cols = std::min(kBlock, nt - j0);
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(nt, cols);
    for (int c = 0; c < cols; ++c) data(j0 + c, c) = 1.0;
    const Eigen::MatrixXd u = op.solve_many(data);
    for (int c = 0; c < cols; ++c) {
      for (int jp = 0; jp < nt; ++jp) {
        const double un = data(jp, c);
        const double u1 = u(g.index(nr - 1, jp), c);
        const double u2 = u(g.index(nr - 2, jp), c);
        m(jp, j0 + c) = (3.0 * un - 4.0 * u1 + u2) / (2.0 * dr);
      }
    }
  }

  DtnMatrix out;
  out.asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  out.matrix = 0.5 * (m + m.transpose());
  out.weights.assign(nt, g.radius() * g.dtheta());
  return out;
}

SteklovSpectrum steklov_spectrum(const Grid& g, int count) {
  if (g.kind() != GridKind::Disk) throw InvalidArgument("steklov_spectrum: needs a disk grid");
  const int nt = g.ntheta();
  if (count < 1 || count > nt) {
    throw InvalidArgument("steklov_spectrum: count must be in [1, boundary node count]");
  }
  const DtnMatrix dtn = dtn_matrix(g);
  const SymmetricEigen eig = jacobi_eigen(dtn.matrix);
  Eigen::MatrixXd vec = eig.vectors;
  const Eigen::VectorXd& val = eig.values;
  std::vector<Parity> parity(nt, Parity::None);

  // Reflection theta -> -theta on boundary nodes: j -> (nt - j) mod nt.
  auto reflect = [nt](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(nt);
    for (int j = 0; j < nt; ++j) r(j) = v((nt - j) % nt);
    return r;
  };

  int start = 0;
  while (start < nt) {
    int end = start + 1;
    while (end < nt && val(end) - val(end - 1) <= 1e-8 * std::max(1.0, std::abs(val(end - 1)))) {
      ++end;
    }
    const int size = end - start;
    Eigen::MatrixXd block = vec.middleCols(start, size);
    Eigen::MatrixXd reflected(nt, size);
    for (int c = 0; c < size; ++c) reflected.col(c) = reflect(block.col(c));
    Eigen::MatrixXd p = block.transpose() * reflected;
    p = 0.5 * (p + p.transpose());
    const SymmetricEigen pe = jacobi_eigen(p);
    // Ascending order puts odd (-1) first; reverse so even modes lead.
    for (int c = 0; c < size; ++c) {
      const int src = size - 1 - c;
      vec.col(start + c) = block * pe.vectors.col(src);
      const double s = pe.values(src);
      parity[start + c] = s > 0.5 ? Parity::Even : (s < -0.5 ? Parity::Odd : Parity::None);
    }
    start = end;
  }

  SteklovSpectrum out;
  out.dtn_asymmetry = dtn.asymmetry;
  out.jacobi_sweeps = eig.sweeps;

  const double w = dtn.weights.front();
  Eigen::MatrixXd traces(nt, count);
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd t = vec.col(k) / std::sqrt(w);
    const double peak = t.cwiseAbs().maxCoeff();
    int lead = 0;
    while (std::abs(t(lead)) < (1.0 - 1e-9) * peak) ++lead;
    if (t(lead) < 0.0) t = -t;
    traces.col(k) = t;
  }

  const DiscreteOperator op = assemble(CoefficientSet::laplace(g));
  const Eigen::MatrixXd ext = op.solve_many(traces);
  for (int k = 0; k < count; ++k) {
    SteklovEigenpair pair{
        val(k), std::vector<double>(traces.col(k).data(), traces.col(k).data() + nt),
        ScalarField(g, std::vector<double>(ext.col(k).data(), ext.col(k).data() + ext.rows()),
                    FieldTag::SteklovEigenfunction),
        parity[k]};
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

SteklovEigenpair disk_analytic_eigenpair(const Grid& g, int k, Parity parity) {
  if (g.kind() != GridKind::Disk) throw InvalidArgument("disk_analytic_eigenpair: needs a disk");
  if (k < 0) throw InvalidArgument("disk_analytic_eigenpair: k must be >= 0");
  if (parity == Parity::None) throw InvalidArgument("disk_analytic_eigenpair: parity required");
  const bool even = parity == Parity::Even;
  ScalarField f = ScalarField::sample(
      g,
      [k, even](const Point2& p) {
        const std::complex<double> z = std::pow(std::complex<double>(p.x(), p.y()), k);
        return even ? z.real() : z.imag();
      },
      FieldTag::SteklovEigenfunction);
  std::vector<double> trace(g.ntheta());
  for (int j = 0; j < g.ntheta(); ++j) trace[j] = f.value(g.index(g.nr(), j));
  return {static_cast<double>(k), std::move(trace), std::move(f), parity};
}

EllipticEstimate check_elliptic_estimate(const ScalarField& f, const Point2& x, double rho,
                                         double eps) {
  if (!(rho > 0.0) || !(eps > 0.0)) {
    throw InvalidArgument("check_elliptic_estimate: rho and eps must be positive");
  }
  EllipticEstimate out;
  const double s = sup_abs_on_ball(f, Ball<2>{x, rho});
  out.sup_squared = s * s;
  out.integral = ball_integral(f, Ball<2>{x, (1.0 + eps) * rho}, SquareIntegrand{});
  if (!(out.integral > 0.0)) {
    throw DegenerateInput("check_elliptic_estimate: field vanishes on the ball");
  }
  out.ratio = out.sup_squared / out.integral;
  return out;
}

void write_eigenpairs(const std::filesystem::path& dir,
                      const std::vector<SteklovEigenpair>& pairs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream index(dir / "eigenpairs.csv");
  if (!index) throw IoError("cannot open " + (dir / "eigenpairs.csv").string());
  index << "k,lambda,trace_file,field_file\n";
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& pair = pairs[k];
    const std::string trace_file = "trace_" + std::to_string(k) + ".csv";
    const std::string field_file = "field_" + std::to_string(k) + ".csv";
    index << k << ',' << format_double(pair.eigenvalue) << ',' << trace_file << ','
          << field_file << '\n';

    std::ofstream trace(dir / trace_file);
    if (!trace) throw IoError("cannot open " + (dir / trace_file).string());
    const Grid& g = pair.interior.grid();
    trace << "j,theta,value\n";
    for (std::size_t j = 0; j < pair.trace.size(); ++j) {
      trace << j << ',' << format_double(g.theta(static_cast<int>(j))) << ','
            << format_double(pair.trace[j]) << '\n';
    }
    write_field_csv(dir / field_file, pair.interior);
  }
  if (!index) throw IoError("write failed: " + (dir / "eigenpairs.csv").string());
}

}  // namespace nodalab
