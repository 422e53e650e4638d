#include "nodalab/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "nodalab/errors.hpp"

namespace nodalab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSnap = 1e-10;

double snap_fraction(double f) {
  if (std::abs(f) < kSnap) return 0.0;
  if (std::abs(1.0 - f) < kSnap) return 1.0;
  return f;
}

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

Grid Grid::rectangle(double x_min, double x_max, double y_min, double y_max, int nx,
                     int ny) {
  if (nx < 3 || ny < 3) throw InvalidArgument("rectangle grid needs >= 3 nodes per axis");
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw InvalidArgument("rectangle grid needs x_max > x_min and y_max > y_min");
  }
  Grid g;
  g.kind_ = GridKind::Rectangle;
  g.nx_ = nx;
  g.ny_ = ny;
  g.x_min_ = x_min;
  g.x_max_ = x_max;
  g.y_min_ = y_min;
  g.y_max_ = y_max;
  g.hx_ = (x_max - x_min) / (nx - 1);
  g.hy_ = (y_max - y_min) / (ny - 1);
  return g;
}

Grid Grid::disk(double radius, int nr, int ntheta) {
  return extended_disk(radius, nr, ntheta, 0);
}

Grid Grid::extended_disk(double radius, int nr, int ntheta, int extra_rings) {
  if (!(radius > 0.0)) throw InvalidArgument("disk grid needs a positive radius");
  if (nr < 3 || ntheta < 3) throw InvalidArgument("disk grid needs nr >= 3 and ntheta >= 3");
  if (extra_rings < 0 || extra_rings > nr) {
    throw InvalidArgument("disk grid extension must be between 0 and nr rings");
  }
  Grid g;
  g.kind_ = GridKind::Disk;
  g.radius_ = radius;
  g.nr_ = nr;
  g.rings_ = nr + extra_rings;
  g.ntheta_ = ntheta;
  g.dr_ = radius / nr;
  g.dtheta_ = kTwoPi / ntheta;
  return g;
}

double Grid::theta(int j) const { return kTwoPi * j / ntheta_; }

std::size_t Grid::node_count() const {
  if (kind_ == GridKind::Rectangle) return static_cast<std::size_t>(nx_) * ny_;
  return 1 + static_cast<std::size_t>(rings_) * ntheta_;
}

std::size_t Grid::index(int i, int j) const {
  if (kind_ == GridKind::Rectangle) {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) * j;
  }
  if (i == 0) return 0;
  const int jj = ((j % ntheta_) + ntheta_) % ntheta_;
  return 1 + static_cast<std::size_t>(i - 1) * ntheta_ + jj;
}

std::pair<int, int> Grid::ij(std::size_t index) const {
  if (kind_ == GridKind::Rectangle) {
    return {static_cast<int>(index % nx_), static_cast<int>(index / nx_)};
  }
  if (index == 0) return {0, 0};
  const std::size_t k = index - 1;
  return {static_cast<int>(k / ntheta_) + 1, static_cast<int>(k % ntheta_)};
}

Point2 Grid::node(std::size_t index) const {
  const auto [i, j] = ij(index);
  if (kind_ == GridKind::Rectangle) return {x(i), y(j)};
  if (i == 0) return Point2::Zero();
  const double r = ring_radius(i);
  const double t = theta(j);
  return {r * std::cos(t), r * std::sin(t)};
}

double Grid::spacing() const {
  return kind_ == GridKind::Rectangle ? std::min(hx_, hy_) : dr_;
}

bool Grid::is_boundary_node(std::size_t index) const {
  const auto [i, j] = ij(index);
  if (kind_ == GridKind::Rectangle) {
    return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
  }
  return i == nr_;
}

std::vector<std::size_t> Grid::boundary_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < node_count(); ++k) {
    if (is_boundary_node(k)) out.push_back(k);
  }
  return out;
}

bool Grid::contains(const Point2& p, double tol) const {
  if (kind_ == GridKind::Rectangle) {
    return p.x() >= x_min_ - tol && p.x() <= x_max_ + tol && p.y() >= y_min_ - tol &&
           p.y() <= y_max_ + tol;
  }
  return p.norm() <= radial_extent() + tol;
}

bool Grid::contains_ball(const Ball<2>& ball, double tol) const {
  const Point2& c = ball.center;
  const double r = ball.radius;
  if (kind_ == GridKind::Rectangle) {
    return c.x() - r >= x_min_ - tol && c.x() + r <= x_max_ + tol &&
           c.y() - r >= y_min_ - tol && c.y() + r <= y_max_ + tol;
  }
  return c.norm() + r <= radial_extent() + tol;
}

bool Grid::operator==(const Grid& o) const {
  if (kind_ != o.kind_) return false;
  if (kind_ == GridKind::Rectangle) {
    return nx_ == o.nx_ && ny_ == o.ny_ && x_min_ == o.x_min_ && x_max_ == o.x_max_ &&
           y_min_ == o.y_min_ && y_max_ == o.y_max_;
  }
  return radius_ == o.radius_ && nr_ == o.nr_ && rings_ == o.rings_ && ntheta_ == o.ntheta_;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == GridKind::Rectangle) {
    os << "grid=rectangle,nx=" << nx_ << ",ny=" << ny_ << ",x_min=" << x_min_
       << ",x_max=" << x_max_ << ",y_min=" << y_min_ << ",y_max=" << y_max_;
  } else {
    os << "grid=disk,nx=" << rings_ << ",ny=" << ntheta_ << ",radius=" << radius_
       << ",nr=" << nr_;
  }
  return os.str();
}

void check_ball_inside(const Grid& grid, const Ball<2>& ball, const char* who) {
  if (!grid.contains_ball(ball)) {
    std::ostringstream os;
    os << who << ": ball (" << ball.center.x() << ", " << ball.center.y() << "; r="
       << ball.radius << ") leaves the grid domain";
    throw OutOfDomain(os.str());
  }
}

// ---------------------------------------------------------------------------
// Interpolation

Stencil interpolation_stencil(const Grid& g, const Point2& p) {
  if (!g.contains(p)) {
    std::ostringstream os;
    os << "point (" << p.x() << ", " << p.y() << ") outside " << g.describe();
    throw OutOfDomain(os.str());
  }
  Stencil st;
  auto push = [&st](std::size_t node, double w) {
    if (w == 0.0) return;
    st.node[st.size] = node;
    st.weight[st.size] = w;
    ++st.size;
  };

  if (g.kind() == GridKind::Rectangle) {
    const double sx = std::clamp((p.x() - g.x_min()) / g.hx(), 0.0, g.nx() - 1.0);
    const double sy = std::clamp((p.y() - g.y_min()) / g.hy(), 0.0, g.ny() - 1.0);
    int i = std::min(static_cast<int>(std::floor(sx)), g.nx() - 2);
    int j = std::min(static_cast<int>(std::floor(sy)), g.ny() - 2);
    const double fx = snap_fraction(sx - i);
    const double fy = snap_fraction(sy - j);
    push(g.index(i, j), (1 - fx) * (1 - fy));
    push(g.index(i + 1, j), fx * (1 - fy));
    push(g.index(i, j + 1), (1 - fx) * fy);
    push(g.index(i + 1, j + 1), fx * fy);
    if (st.size == 0) push(g.index(i, j), 1.0);
    return st;
  }

  const double r = p.norm();
  const double sr = std::min(r / g.dr(), static_cast<double>(g.rings()));
  int i = std::min(static_cast<int>(std::floor(sr)), g.rings() - 1);
  const double fr = snap_fraction(sr - i);
  const double t = r > 0.0 ? wrap_angle(std::atan2(p.y(), p.x())) / g.dtheta() : 0.0;
  int j = static_cast<int>(std::floor(t));
  const double ft = snap_fraction(t - j);
  j %= g.ntheta();
  const int j1 = (j + 1) % g.ntheta();

  if (i == 0) {
    push(0, 1 - fr);
    push(g.index(1, j), fr * (1 - ft));
    push(g.index(1, j1), fr * ft);
  } else {
    push(g.index(i, j), (1 - fr) * (1 - ft));
    push(g.index(i, j1), (1 - fr) * ft);
    push(g.index(i + 1, j), fr * (1 - ft));
    push(g.index(i + 1, j1), fr * ft);
  }
  if (st.size == 0) push(0, 1.0);
  return st;
}

// ---------------------------------------------------------------------------
// ScalarField

namespace detail {

struct FieldCache {
  std::once_flag gradient_once;
  std::vector<Point2> gradient;

  std::once_flag table_once;
  // table[level][j * nx + i] = max |v| over row j, columns [i, i + 2^level).
  std::vector<std::vector<double>> row_table;
};

}  // namespace detail

ScalarField::ScalarField(Grid grid, std::vector<double> values, FieldTag tag)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      tag_(tag),
      cache_(std::make_shared<detail::FieldCache>()) {
  if (values_.size() != grid_.node_count()) {
    throw InvalidArgument("ScalarField: value count does not match the grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("ScalarField: values must be finite");
  }
}

ScalarField ScalarField::sample(const Grid& grid,
                                const std::function<double(const Point2&)>& fn,
                                FieldTag tag) {
  std::vector<double> v(grid.node_count());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(grid.node(k));
  return ScalarField(grid, std::move(v), tag);
}

ScalarField ScalarField::with_tag(FieldTag tag) const {
  ScalarField copy = *this;
  copy.tag_ = tag;
  return copy;
}

double ScalarField::eval(const Point2& p) const {
  const Stencil st = interpolation_stencil(grid_, p);
  double s = 0.0;
  for (int k = 0; k < st.size; ++k) s += st.weight[k] * values_[st.node[k]];
  return s;
}

double ScalarField::eval_smooth(const Point2& p) const {
  if (grid_.kind() != GridKind::Rectangle) return eval(p);
  auto axis = [](double x, double lo, double h, int n, int& first, double w[4]) {
    const double s = (x - lo) / h;
    first = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, n - 4);
    const double t = s - first;
    for (int a = 0; a < 4; ++a) {
      double l = 1.0;
      for (int b = 0; b < 4; ++b) {
        if (b != a) l *= (t - b) / static_cast<double>(a - b);
      }
      w[a] = l;
    }
  };
  if (grid_.nx() < 4 || grid_.ny() < 4) return eval(p);
  int i0, j0;
  double wx[4], wy[4];
  axis(p.x(), grid_.x_min(), grid_.hx(), grid_.nx(), i0, wx);
  axis(p.y(), grid_.y_min(), grid_.hy(), grid_.ny(), j0, wy);
  double s = 0.0;
  for (int b = 0; b < 4; ++b) {
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += wx[a] * values_[grid_.index(i0 + a, j0 + b)];
    s += wy[b] * row;
  }
  return s;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

const std::vector<Point2>& ScalarField::nodal_gradient() const {
  std::call_once(cache_->gradient_once, [this] {
    const Grid& g = grid_;
    const auto& v = values_;
    std::vector<Point2> grad(g.node_count(), Point2::Zero());

    if (g.kind() == GridKind::Rectangle) {
      const int nx = g.nx(), ny = g.ny();
      auto d = [&](int i, int j, int di, int dj, int n, int pos, double h) {
        auto at = [&](int s) { return v[g.index(i + s * di, j + s * dj)]; };
        if (pos == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        if (pos == n - 1) return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
        if (pos == 1 || pos == n - 2) return (at(1) - at(-1)) / (2.0 * h);
        return (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h);
      };
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          grad[g.index(i, j)] = {d(i, j, 1, 0, nx, i, g.hx()), d(i, j, 0, 1, ny, j, g.hy())};
        }
      }
    } else {
      const int nt = g.ntheta(), nrings = g.rings();
      const double dr = g.dr(), dt = g.dtheta();
      auto val = [&](int i, int j) { return v[g.index(i, j)]; };
      for (int i = 1; i <= nrings; ++i) {
        const double r = g.ring_radius(i);
        for (int j = 0; j < nt; ++j) {
          double dvr;
          if (i < nrings) {
            dvr = (val(i + 1, j) - val(i - 1, j)) / (2.0 * dr);
          } else {
            dvr = (3.0 * val(i, j) - 4.0 * val(i - 1, j) + val(i - 2, j)) / (2.0 * dr);
          }
          const double dvt = (val(i, j + 1) - val(i, j - 1)) / (2.0 * dt);
          const double c = std::cos(g.theta(j)), s = std::sin(g.theta(j));
          grad[g.index(i, j)] = {c * dvr - s * dvt / r, s * dvr + c * dvt / r};
        }
      }
      // Center: least-squares plane through the first ring.
      Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
      Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
      for (int j = 0; j < nt; ++j) {
        const Point2 p = g.node(g.index(1, j));
        m += p * p.transpose();
        rhs += p * (val(1, j) - v[0]);
      }
      grad[0] = m.ldlt().solve(rhs);
    }
    cache_->gradient = std::move(grad);
  });
  return cache_->gradient;
}

double ScalarField::row_max_abs(int j, int i0, int i1) const {
  if (grid_.kind() != GridKind::Rectangle) {
    throw InvalidArgument("row_max_abs is defined on rectangle grids only");
  }
  std::call_once(cache_->table_once, [this] {
    const int nx = grid_.nx(), ny = grid_.ny();
    auto& table = cache_->row_table;
    table.emplace_back(values_.size());
    for (std::size_t k = 0; k < values_.size(); ++k) table[0][k] = std::abs(values_[k]);
    for (int level = 1; (1 << level) <= nx; ++level) {
      const auto& prev = table[level - 1];
      std::vector<double> cur(values_.size(), 0.0);
      const int half = 1 << (level - 1);
      for (int jj = 0; jj < ny; ++jj) {
        const std::size_t base = static_cast<std::size_t>(jj) * nx;
        for (int i = 0; i + (1 << level) <= nx; ++i) {
          cur[base + i] = std::max(prev[base + i], prev[base + i + half]);
        }
      }
      table.push_back(std::move(cur));
    }
  });
  if (i0 > i1) return 0.0;
  const auto& table = cache_->row_table;
  const int len = i1 - i0 + 1;
  const int level = std::bit_width(static_cast<unsigned>(len)) - 1;
  const std::size_t base = static_cast<std::size_t>(j) * grid_.nx();
  return std::max(table[level][base + i0], table[level][base + i1 - (1 << level) + 1]);
}

// ---------------------------------------------------------------------------
// Coefficients

CoefficientSet::CoefficientSet(Grid grid, std::vector<Eigen::Matrix2d> a,
                               std::vector<Point2> b, std::vector<double> c)
    : grid_(std::move(grid)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  const std::size_t n = grid_.node_count();
  if (a_.size() != n || b_.size() != n || c_.size() != n) {
    throw InvalidArgument("CoefficientSet: field sizes do not match the grid");
  }
}

CoefficientSet CoefficientSet::laplace(const Grid& grid) {
  const std::size_t n = grid.node_count();
  return CoefficientSet(grid, std::vector<Eigen::Matrix2d>(n, Eigen::Matrix2d::Identity()),
                        std::vector<Point2>(n, Point2::Zero()), std::vector<double>(n, 0.0));
}

CoefficientSet CoefficientSet::from_functions(const Grid& grid, const MatrixFn& a,
                                              const VectorFn& b, const ScalarFn& c) {
  const std::size_t n = grid.node_count();
  std::vector<Eigen::Matrix2d> av(n);
  std::vector<Point2> bv(n);
  std::vector<double> cv(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point2 p = grid.node(k);
    av[k] = a ? a(p) : Eigen::Matrix2d::Identity();
    bv[k] = b ? b(p) : Point2::Zero();
    cv[k] = c ? c(p) : 0.0;
  }
  return CoefficientSet(grid, std::move(av), std::move(bv), std::move(cv));
}

Eigen::Matrix2d CoefficientSet::a_at(const Point2& p) const {
  const Stencil st = interpolation_stencil(grid_, p);
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  for (int k = 0; k < st.size; ++k) m += st.weight[k] * a_[st.node[k]];
  return m;
}

Point2 CoefficientSet::b_at(const Point2& p) const {
  const Stencil st = interpolation_stencil(grid_, p);
  Point2 v = Point2::Zero();
  for (int k = 0; k < st.size; ++k) v += st.weight[k] * b_[st.node[k]];
  return v;
}

double CoefficientSet::c_at(const Point2& p) const {
  const Stencil st = interpolation_stencil(grid_, p);
  double v = 0.0;
  for (int k = 0; k < st.size; ++k) v += st.weight[k] * c_[st.node[k]];
  return v;
}

bool CoefficientSet::is_isotropic(double tol) const {
  return std::all_of(a_.begin(), a_.end(), [tol](const Eigen::Matrix2d& m) {
    return std::abs(m(0, 1)) <= tol && std::abs(m(1, 0)) <= tol &&
           std::abs(m(0, 0) - m(1, 1)) <= tol * std::max(1.0, std::abs(m(0, 0)));
  });
}

bool CoefficientSet::has_lower_order_terms() const {
  return std::any_of(b_.begin(), b_.end(), [](const Point2& v) { return !v.isZero(0.0); }) ||
         std::any_of(c_.begin(), c_.end(), [](double v) { return v != 0.0; });
}

Bounds verify_conditions(const CoefficientSet& k) {
  const Grid& g = k.grid();
  Bounds out;
  out.eta = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const Eigen::Matrix2d& a = k.a(n);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (std::abs(a(0, 1) - a(1, 0)) > 1e-12 * scale) {
      std::ostringstream os;
      os << "verify_conditions: a is not symmetric at node " << n;
      throw InvalidCoefficient(os.str());
    }
    const double half_trace = 0.5 * (a(0, 0) + a(1, 1));
    const double disc = std::hypot(0.5 * (a(0, 0) - a(1, 1)), a(0, 1));
    out.eta = std::min(out.eta, half_trace - disc);
    const double sum = a.cwiseAbs().sum() + k.b(n).cwiseAbs().sum() + std::abs(k.c(n));
    out.Lambda = std::max(out.Lambda, sum);
  }

  auto lipschitz = [&](std::size_t p, std::size_t q) {
    const double dist = (g.node(p) - g.node(q)).norm();
    if (dist == 0.0) return;
    out.Gamma = std::max(out.Gamma, (k.a(p) - k.a(q)).cwiseAbs().sum() / dist);
  };
  if (g.kind() == GridKind::Rectangle) {
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.nx(); ++i) {
        if (i + 1 < g.nx()) lipschitz(g.index(i, j), g.index(i + 1, j));
        if (j + 1 < g.ny()) lipschitz(g.index(i, j), g.index(i, j + 1));
      }
    }
  } else {
    for (int i = 1; i <= g.rings(); ++i) {
      for (int j = 0; j < g.ntheta(); ++j) {
        lipschitz(g.index(i, j), g.index(i - 1, j));
        lipschitz(g.index(i, j), g.index(i, j + 1));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ball suprema

namespace {

double nodes_max_in_ball(const ScalarField& f, const Point2& x, double r) {
  const Grid& g = f.grid();
  double m = 0.0;
  if (g.kind() == GridKind::Rectangle) {
    const int j0 = std::max(0, static_cast<int>(std::ceil((x.y() - r - g.y_min()) / g.hy())));
    const int j1 =
        std::min(g.ny() - 1, static_cast<int>(std::floor((x.y() + r - g.y_min()) / g.hy())));
    for (int j = j0; j <= j1; ++j) {
      const double dy = g.y(j) - x.y();
      const double w2 = r * r - dy * dy;
      if (w2 < 0.0) continue;
      const double w = std::sqrt(w2);
      const int i0 = std::max(0, static_cast<int>(std::ceil((x.x() - w - g.x_min()) / g.hx())));
      const int i1 =
          std::min(g.nx() - 1, static_cast<int>(std::floor((x.x() + w - g.x_min()) / g.hx())));
      if (i0 <= i1) m = std::max(m, f.row_max_abs(j, i0, i1));
    }
    return m;
  }

  const double d = x.norm();
  const auto vals = f.values();
  if (d <= r) m = std::abs(vals[0]);
  const double tc = d > 0.0 ? wrap_angle(std::atan2(x.y(), x.x())) : 0.0;
  const int i0 = std::max(1, static_cast<int>(std::ceil((d - r) / g.dr())));
  const int i1 = std::min(g.rings(), static_cast<int>(std::floor((d + r) / g.dr())));
  const int nt = g.ntheta();
  for (int i = i0; i <= i1; ++i) {
    const double rho = g.ring_radius(i);
    bool whole = false;
    double half = 0.0;
    if (d == 0.0) {
      if (rho > r) continue;
      whole = true;
    } else {
      const double cosd = (rho * rho + d * d - r * r) / (2.0 * rho * d);
      if (cosd > 1.0) continue;
      if (cosd <= -1.0) {
        whole = true;
      } else {
        half = std::acos(cosd);
      }
    }
    int ja = 0, jb = nt - 1;
    if (!whole) {
      ja = static_cast<int>(std::ceil((tc - half) / g.dtheta()));
      jb = static_cast<int>(std::floor((tc + half) / g.dtheta()));
      if (jb - ja + 1 >= nt) {
        ja = 0;
        jb = nt - 1;
      }
    }
    for (int j = ja; j <= jb; ++j) m = std::max(m, std::abs(vals[g.index(i, j)]));
  }
  return m;
}

double ring_max(const ScalarField& f, const Point2& x, double rho, const SupSampling& s) {
  const int n = std::max(s.min_ring_samples,
                         static_cast<int>(std::ceil(s.samples_per_unit_length * kTwoPi * rho)));
  const double step = kTwoPi / n;
  auto at = [&](double phi) {
    return std::abs(f.eval(x + rho * Point2(std::cos(phi), std::sin(phi))));
  };
  double best = -1.0;
  int best_k = 0;
  for (int k = 0; k < n; ++k) {
    const double v = at(k * step);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  // Golden-section search for a local maximum bracketing the best sample.
  double a = (best_k - 1) * step, b = (best_k + 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = at(c), fd = at(d);
  for (int it = 0; it < s.refine_iterations; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = at(d);
    }
  }
  return std::max({best, fc, fd});
}

// Ring radii r, r/2, r/4, ... kept while >= h (the first is always kept).
// Powers of two keep the ladders of r and 2r exactly nested.
std::vector<double> ring_ladder(double r, double h) {
  std::vector<double> out{r};
  for (int m = 1;; ++m) {
    const double rho = std::ldexp(r, -m);
    if (rho < h) break;
    out.push_back(rho);
  }
  return out;
}

}  // namespace

double sup_abs_on_ball(const ScalarField& f, const Ball<2>& ball, const SupSampling& s) {
  check_ball_inside(f.grid(), ball, "sup_abs_on_ball");
  double m = nodes_max_in_ball(f, ball.center, ball.radius);
  for (double rho : ring_ladder(ball.radius, f.grid().spacing())) {
    m = std::max(m, ring_max(f, ball.center, rho, s));
  }
  return m;
}

std::pair<double, double> sup_abs_inner_outer(const ScalarField& f, const Point2& x, double r,
                                              int t, const SupSampling& s) {
  if (t < 2 || (t & (t - 1)) != 0) {
    throw InvalidArgument("sup_abs_inner_outer: t must be a power of two >= 2");
  }
  const double outer_r = r * t;
  check_ball_inside(f.grid(), Ball<2>{x, outer_r}, "sup_abs_inner_outer");
  double inner = nodes_max_in_ball(f, x, r);
  double outer = nodes_max_in_ball(f, x, outer_r);
  for (double rho : ring_ladder(outer_r, f.grid().spacing())) {
    const double m = ring_max(f, x, rho, s);
    outer = std::max(outer, m);
    if (rho <= r) inner = std::max(inner, m);
  }
  return {inner, outer};
}

// ---------------------------------------------------------------------------
// Integrals

double sphere_integral(const ScalarField& f, const Point2& center, double r,
                       SphereIntegrand integrand) {
  if (!(r > 0.0)) throw InvalidArgument("sphere_integral: radius must be positive");
  check_ball_inside(f.grid(), Ball<2>{center, r}, "sphere_integral");
  const double h = f.grid().spacing();
  const int m = std::max(64, 4 * static_cast<int>(std::ceil(kTwoPi * r / h)));
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const double phi = kTwoPi * k / m;
    const double v = f.eval_smooth(center + r * Point2(std::cos(phi), std::sin(phi)));
    sum += integrand == SphereIntegrand::Square ? v * v : v;
  }
  return sum * kTwoPi * r / m;
}

ScalarField integrand_density(const ScalarField& f, SquareIntegrand) {
  std::vector<double> d(f.values().begin(), f.values().end());
  for (double& v : d) v *= v;
  return ScalarField(f.grid(), std::move(d));
}

ScalarField integrand_density(const ScalarField& f, GradSquareIntegrand) {
  const auto& grad = f.nodal_gradient();
  std::vector<double> d(grad.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = grad[k].squaredNorm();
  return ScalarField(f.grid(), std::move(d));
}

ScalarField integrand_density(const ScalarField& f, FrequencyIntegrand integrand) {
  if (integrand.coeffs == nullptr) {
    throw InvalidArgument("frequency integrand needs a coefficient set");
  }
  const CoefficientSet& k = *integrand.coeffs;
  const bool shared = k.grid() == f.grid();
  const auto& grad = f.nodal_gradient();
  std::vector<double> d(grad.size());
  for (std::size_t n = 0; n < d.size(); ++n) {
    const double u = f.value(n);
    Point2 b;
    double c;
    if (shared) {
      b = k.b(n);
      c = k.c(n);
    } else {
      const Point2 p = f.grid().node(n);
      b = k.b_at(p);
      c = k.c_at(p);
    }
    d[n] = grad[n].squaredNorm() + u * b.dot(grad[n]) + c * u * u;
  }
  return ScalarField(f.grid(), std::move(d));
}

double integrate_density_over_ball(const ScalarField& density, const Ball<2>& ball) {
  check_ball_inside(density.grid(), ball, "ball_integral");
  const double r = ball.radius;
  const double h = density.grid().spacing();
  const int panels = std::max(8, static_cast<int>(std::ceil(r / h)));
  const double width = r / panels;
  const double gl = 0.5 / std::sqrt(3.0);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    for (double offset : {0.5 - gl, 0.5 + gl}) {
      const double rho = (p + offset) * width;
      const int m = std::max(64, 4 * static_cast<int>(std::ceil(kTwoPi * rho / h)));
      double ring = 0.0;
      for (int k = 0; k < m; ++k) {
        const double phi = kTwoPi * k / m;
        ring += density.eval_smooth(ball.center + rho * Point2(std::cos(phi), std::sin(phi)));
      }
      total += 0.5 * width * rho * ring * kTwoPi / m;
    }
  }
  return total;
}

}  // namespace nodalab
