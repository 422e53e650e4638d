#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "nodalab/fields.hpp"
#include "nodalab/geometry.hpp"

namespace nodalab {

/// N(x, r) = log2(sup_{B(x,2r)} |u| / sup_{B(x,r)} |u|).
struct DoublingReport {
  Point2 center = Point2::Zero();
  double radius = 0.0;
  double N = 0.0;
  double sup_inner = 0.0;
  double sup_outer = 0.0;
};

/// Throws InvalidArgument for r below 4 grid spacings, OutOfDomain when
/// B(x, 2r) leaves the grid and DegenerateInput when u vanishes on B(x, r).
DoublingReport doubling_index(const ScalarField& u, const Point2& x, double r,
                              const SupSampling& sampling = {});

struct CubeLattice {
  int centers_per_axis = 9;
  int radii = 12;
  bool refine = true;  // pattern search from the best lattice sample
};

struct CubeIndexReport {
  Cube<2> cube;
  double N = 0.0;
  Point2 argmax_center = Point2::Zero();
  double argmax_radius = 0.0;
  int admissible = 0;  // lattice samples with B(x, 2r) inside the grid
  int clipped = 0;     // lattice samples skipped because B(x, 2r) leaves the grid
  int refine_steps = 0;
};

/// Max of N(x, r) over an m x m lattice of centers spanning Q (corners
/// included) and k geometric radii strictly inside (4h, diam Q), optionally
/// improved by a pattern search over (x, y, log r) that stays inside Q and
/// the admissible radius range. Throws DegenerateInput when no sample is
/// admissible.
CubeIndexReport uniform_doubling_index(const ScalarField& u, const Cube<2>& cube,
                                       const CubeLattice& lattice = {});

struct FrequencyProfile {
  Point2 center = Point2::Zero();
  std::vector<double> r, H, D, I, beta;
  bool harmonic = true;  // coefficients have b = 0 and c = 0
};

/// H(r) = sphere integral of u^2, D(r) = ball integral of |grad u|^2,
/// I(r) = ball integral of |grad u|^2 + u b.grad u + c u^2, beta = r I / H,
/// at `samples` geometrically spaced radii in [r_min, r_max].
/// Throws DegenerateInput naming the radius when H vanishes.
FrequencyProfile frequency_profile(const ScalarField& u, const CoefficientSet& coeffs,
                                   const Point2& center, double r_min, double r_max,
                                   int samples);

struct AlmostMonotonicityReport {
  double max_violation = 0.0;  // max over r < r' of beta(r) - beta(r'), clipped at 0
  std::vector<double> eps;     // c3 = 1 + eps
  std::vector<double> c2;      // smallest c2 >= 0 for each eps
  double best_c2 = 0.0;
  double best_c3 = 1.0;
};

/// Checks beta(r) <= c2 + c3 beta(r0) over all sample pairs r < r0 <= r0_max
/// (all pairs when r0_max is unset), for eps = 0.05, 0.10, ..., 0.5.
AlmostMonotonicityReport check_almost_monotonicity(const FrequencyProfile& profile,
                                                   std::optional<double> r0_max = {});

struct HGrowthReport {
  double ratio = 0.0;             // H(R2) / H(R1)
  double identity_predicted = 0.0;  // (R2/R1)^(n-1) exp(2 int beta / r dr)
  double identity_rel_error = 0.0;
  double max_h_over_r_drop = 0.0;  // max relative decrease of H(r)/r between samples
  double growth_exponent = 0.0;    // log(ratio) / log(R2/R1)
  double lower_exponent = 0.0;     // (beta(R1) - c2) / c3
  double upper_exponent = 0.0;     // 2 (c3 beta(R2) + c2)
  double log_c5 = 0.0;             // smallest log c5 >= 0 closing the upper bound
  bool lower_holds = false;
};

/// R1 and R2 must be profile radii (relative match 1e-9).
HGrowthReport check_H_growth(const FrequencyProfile& profile, double r1, double r2,
                             double c2 = 0.0, double c3 = 1.0);

struct SandwichReport {
  double ratio = 0.0;  // sup_{B(x, t rho)} / sup_{B(x, rho)}
  double N_rho = 0.0;
  std::optional<double> N_t_rho;  // when B(x, 2 t rho) fits the grid
  double growth = 0.0;            // log_t(ratio)
  double lower_exponent = 0.0;    // N_rho (1 - eps) - c6
  double upper_exponent = 0.0;    // N_rho (1 + eps) + c6
  double lower_margin = 0.0;      // growth - lower_exponent
  double upper_margin = 0.0;      // upper_exponent - growth
  bool satisfied = false;
};

/// Requires t > 2 and B(x, t rho) inside the grid.
SandwichReport check_doubling_sandwich(const ScalarField& u, const Point2& x, double rho,
                                       double t, double eps, double c6,
                                       const SupSampling& sampling = {});

struct NearbyReport {
  double N1 = 0.0;  // N(x1, rho)
  double N2 = 0.0;  // N(x2, c15 rho)
  bool holds = false;  // N2 > 0.99 N1
};

/// Requires |x1 - x2| < rho.
NearbyReport compare_nearby(const ScalarField& u, const Point2& x1, const Point2& x2,
                            double rho, double c15);

struct BarycenterReport {
  std::array<double, 3> vertex_N{};  // N(x_i, diam / 4)
  double N_min = 0.0;
  double N_barycenter = 0.0;  // N(x0, C diam)
  double gain = 0.0;
  bool degenerate = false;  // N_min == 0: gain undefined
};

BarycenterReport barycenter_test(const ScalarField& u, const Simplex<2>& simplex, double c);

/// Line {p : normal . p = offset}.
struct Hyperplane {
  Point2 normal;
  double offset = 0.0;
};

struct SubcubeEntry {
  int i = 0, j = 0;
  Cube<2> cube;
  CubeIndexReport report;
  bool bad = false;
  bool meets_plane = true;
};

struct BadCubeCount {
  int count = 0;
  std::vector<SubcubeEntry> entries;  // all A^2 sub-cubes, subdivision order
};

/// Counts sub-cubes of the A x A partition with N(q) >= threshold, optionally
/// only among those meeting `plane`.
BadCubeCount count_bad_subcubes(const ScalarField& u, const Cube<2>& cube, int parts,
                                double threshold, const CubeLattice& lattice = {},
                                const std::optional<Hyperplane>& plane = {});

/// CSV `r,H,D,I,beta`.
void write_profile_csv(const std::filesystem::path& path, const FrequencyProfile& profile);
/// CSV `i,j,cx,cy,N`.
void write_cube_report_csv(const std::filesystem::path& path, const BadCubeCount& count);

}  // namespace nodalab
