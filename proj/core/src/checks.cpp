#include "nodalab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "nodalab/elliptic.hpp"
#include "nodalab/errors.hpp"
#include "nodalab/experiments.hpp"
#include "nodalab/growth.hpp"
#include "nodalab/nodal.hpp"
#include "nodalab/transform.hpp"

namespace nodalab {

namespace {

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double unit(std::mt19937_64& rng) { return std::ldexp(static_cast<double>(rng() >> 11), -53); }

ScalarField real_power(const Grid& g, int k) {
  return ScalarField::sample(g, [k](const Point2& p) {
    return std::pow(std::complex<double>(p.x(), p.y()), k).real();
  });
}

Grid unit_square(const ExperimentConfig& cfg) {
  return Grid::rectangle(-1, 1, -1, 1, cfg.rectangle_nodes, cfg.rectangle_nodes);
}

// Square twice as wide, so that balls B(x, 2r) around [-1, 1]^2 fit.
Grid wide_square(const ExperimentConfig& cfg) {
  return Grid::rectangle(-2, 2, -2, 2, cfg.rectangle_nodes, cfg.rectangle_nodes);
}

const SteklovEigenpair& nearest_even(const SteklovSpectrum& s, double target) {
  return s.pairs[nearest_even_pair(s, target)];
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

CheckResult make(int id, bool passed, std::string detail) {
  return {id, check_name(id), passed, std::move(detail)};
}

}  // namespace

const char* check_name(int id) {
  switch (id) {
    case 1: return "degree-recovery";
    case 2: return "frequency-oracle";
    case 3: return "growth-identity";
    case 4: return "doubling-sandwich";
    case 5: return "steklov-spectrum";
    case 6: return "nodal-length-law";
    case 7: return "transform-pipeline";
    case 8: return "doubling-scaling";
    case 9: return "cube-counting";
    case 10: return "barycenter-gain";
    case 11: return "invariant-suites";
  }
  return "unknown";
}

CheckResult check_degree_recovery(const ExperimentConfig& cfg) {
  const Grid g = unit_square(cfg);
  bool ok = true;
  std::string detail;
  for (int n : {2, 6, 10}) {
    const auto u = ScalarField::sample(g, [n](const Point2& p) { return std::pow(p.x(), n); });
    const double N = doubling_index(u, Point2::Zero(), 0.25).N;
    const double err = std::abs(N / n - 1.0);
    ok = ok && err <= cfg.tolerances.degree_rel;
    detail += fmt("n=%d N=%.5f err=%.2e; ", n, N, err);
  }
  return make(1, ok, detail + fmt("tol %.2e", cfg.tolerances.degree_rel));
}

CheckResult check_frequency_oracle(const ExperimentConfig& cfg) {
  const Grid g = unit_square(cfg);
  const auto K = CoefficientSet::laplace(g);
  double worst_rel = 0.0, worst_violation = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const auto profile = frequency_profile(real_power(g, k), K, Point2::Zero(), 0.1, 0.4, 13);
    for (double b : profile.beta) worst_rel = std::max(worst_rel, std::abs(b / k - 1.0));
    worst_violation = std::max(worst_violation, check_almost_monotonicity(profile).max_violation);
  }
  const auto& t = cfg.tolerances;
  const bool ok = worst_rel <= t.beta_rel && worst_violation <= t.beta_monotone;
  return make(2, ok,
              fmt("k=1..6 max |beta/k-1|=%.2e (tol %.2e) max decrease=%.2e (tol %.2e)", worst_rel,
                  t.beta_rel, worst_violation, t.beta_monotone));
}

CheckResult check_growth_identity(const ExperimentConfig& cfg) {
  const Grid g = unit_square(cfg);
  const auto K = CoefficientSet::laplace(g);
  double worst_ratio = 0.0, worst_identity = 0.0, worst_drop = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const auto profile = frequency_profile(real_power(g, k), K, Point2::Zero(), 0.1, 0.4, 13);
    const auto rep = check_H_growth(profile, 0.1, 0.4);
    worst_ratio = std::max(worst_ratio, std::abs(rep.ratio / std::pow(4.0, 2 * k + 1) - 1.0));
    worst_identity = std::max(worst_identity, rep.identity_rel_error);
    worst_drop = std::max(worst_drop, rep.max_h_over_r_drop);
  }
  const auto& t = cfg.tolerances;
  const bool ok = worst_ratio <= t.growth_rel && worst_identity <= t.growth_rel &&
                  worst_drop <= t.h_over_r_drop;
  return make(3, ok,
              fmt("k=1..6 H ratio err=%.2e identity err=%.2e (tol %.2e) H/r drop=%.2e (tol %.2e)",
                  worst_ratio, worst_identity, t.growth_rel, worst_drop, t.h_over_r_drop));
}

CheckResult check_sandwich_law(const ExperimentConfig& cfg) {
  const auto u = real_power(unit_square(cfg), 3);
  const auto& t = cfg.tolerances;
  const auto rep = check_doubling_sandwich(u, Point2::Zero(), 0.05, 4.0, t.sandwich_eps, 0.0);
  const double err = std::abs(rep.ratio / 64.0 - 1.0);
  const bool ok = err <= t.sandwich_rel && rep.satisfied;
  return make(4, ok,
              fmt("ratio=%.4f err vs 64=%.2e (tol %.2e) N=%.4f margins %.3f/%.3f satisfied=%d",
                  rep.ratio, err, t.sandwich_rel, rep.N_rho, rep.lower_margin, rep.upper_margin,
                  rep.satisfied ? 1 : 0));
}

CheckResult check_steklov_spectrum(const ExperimentConfig& cfg) {
  static constexpr double kExact[9] = {0, 1, 1, 2, 2, 3, 3, 4, 4};
  auto worst = [](const SteklovSpectrum& s) {
    double e = 0.0;
    for (int n = 0; n < 9; ++n) {
      const double d = std::abs(s.pairs[n].eigenvalue - kExact[n]);
      e = std::max(e, n == 0 ? d : d / kExact[n]);
    }
    return e;
  };
  const auto fine = steklov_spectrum(Grid::disk(1.0, cfg.nr, cfg.ntheta), 9);
  const auto coarse = steklov_spectrum(Grid::disk(1.0, cfg.nr / 2, cfg.ntheta / 2), 9);
  const double e_fine = worst(fine), e_coarse = worst(coarse);
  const double factor = e_coarse / e_fine;
  const auto& t = cfg.tolerances;
  const bool ok = e_fine <= t.eigenvalue_rel && factor >= t.convergence_factor;
  std::string values;
  for (int n = 0; n < 9; ++n) values += fmt("%.4f ", fine.pairs[n].eigenvalue);
  return make(5, ok,
              fmt("lambda[0..8]= %smax err=%.2e (tol %.2e) coarse err=%.2e factor=%.2f (min %.1f)",
                  values.c_str(), e_fine, t.eigenvalue_rel, e_coarse, factor,
                  t.convergence_factor));
}

CheckResult check_nodal_length_law(const ExperimentConfig& cfg) {
  std::vector<int> fit_ks = cfg.k_values;
  const int kmax = std::max(8, *std::max_element(fit_ks.begin(), fit_ks.end()));
  const auto spectrum = steklov_spectrum(Grid::disk(1.0, cfg.nr, cfg.ntheta), 2 * kmax + 3);
  const auto& t = cfg.tolerances;
  bool ok = true;
  std::string detail;
  for (int k : {1, 2, 4, 8}) {
    const auto m = nodal_length_of_eigenfunction(spectrum, k);
    const double err = std::abs(m.length / (2.0 * m.eigenvalue) - 1.0);
    ok = ok && err <= t.nodal_rel;
    detail += fmt("k=%d L=%.4f 2lambda=%.4f err=%.2e; ", k, m.length, 2 * m.eigenvalue, err);
  }
  std::vector<std::pair<double, double>> pairs;
  for (int k : fit_ks) {
    const auto m = nodal_length_of_eigenfunction(spectrum, k);
    pairs.emplace_back(m.eigenvalue, m.length);
  }
  const auto fit = fit_exponent(pairs);
  ok = ok && std::abs(fit.slope - 1.0) <= t.slope_abs;
  return make(6, ok,
              detail + fmt("tol %.2e; slope=%.4f (tol +-%.2f)", t.nodal_rel, fit.slope, t.slope_abs));
}

CheckResult check_transform_pipeline(const ExperimentConfig& cfg) {
  const auto& t = cfg.tolerances;
  const Grid fine_grid = Grid::disk(1.0, cfg.nr, cfg.ntheta);
  const Grid finer_grid = Grid::disk(1.0, 2 * cfg.nr, 2 * cfg.ntheta);
  const int count = 2 * static_cast<int>(std::ceil(*std::max_element(cfg.lambda_values.begin(),
                                                                      cfg.lambda_values.end()))) + 3;
  const auto s1 = steklov_spectrum(fine_grid, count);
  const auto s2 = steklov_spectrum(finer_grid, count);
  const Point2 x0(1.0, 0.0);
  const auto delta = blended_distance(fine_grid, cfg.collar);

  bool signs_ok = true, collar_ok = true, halving_ok = true;
  std::vector<double> b_ratios, q_ratios;
  std::string detail;
  for (double target : cfg.lambda_values) {
    const auto& p1 = nearest_even(s1, target);
    const auto& p2 = nearest_even(s2, target);
    const auto r1 = run_transform_pipeline(p1.interior, p1.eigenvalue, x0, cfg.collar);
    const auto r2 = run_transform_pipeline(p2.interior, p2.eigenvalue, x0, cfg.collar);
    signs_ok = signs_ok && r1.sign_mismatches == 0 && r2.sign_mismatches == 0;

    const double lam = p1.eigenvalue;
    const double q = drift_and_potential(lam, delta).c_at(Point2(0.9, 0.0));
    const double q_exact = lam * lam + lam / 0.9;
    const double q_err = std::abs(q / q_exact - 1.0);
    collar_ok = collar_ok && q_err <= t.collar_q_rel;

    const double halving = r1.doubled.residual / r2.doubled.residual;
    halving_ok = halving_ok && std::abs(halving / 2.0 - 1.0) <= t.residual_halving;

    b_ratios.push_back(r1.norms.b_over_lambda);
    q_ratios.push_back(r1.norms.q_over_lambda2);
    detail += fmt("lambda=%.3f mism=%zu/%zu q(0.9) err=%.1e b/l=%.3f q/l2=%.3f res %.3e->%.3e "
                  "(x%.2f); ",
                  lam, r1.sign_mismatches, r2.sign_mismatches, q_err, r1.norms.b_over_lambda,
                  r1.norms.q_over_lambda2, r1.doubled.residual, r2.doubled.residual, halving);
  }
  const double b_var = spread(b_ratios), q_var = spread(q_ratios);
  const bool ok = signs_ok && collar_ok && halving_ok && b_var < t.norm_variation &&
                  q_var < t.norm_variation;
  return make(7, ok,
              detail + fmt("b variation=%.3f q variation=%.3f (tol %.2f); signs=%d collar=%d "
                           "halving=%d",
                           b_var, q_var, t.norm_variation, signs_ok, collar_ok, halving_ok));
}

CheckResult check_doubling_scaling(const ExperimentConfig& cfg) {
  ExperimentConfig sweep_cfg = cfg;
  sweep_cfg.k_values.clear();
  for (double l : cfg.lambda_values) sweep_cfg.k_values.push_back(static_cast<int>(std::lround(l)));
  const auto result = run_steklov_sweep(sweep_cfg);
  std::vector<double> ratios;
  std::string detail;
  for (const auto& r : result.records) {
    if (!r.ok) return make(8, false, fmt("k=%d failed: %s", r.k, r.error.c_str()));
    ratios.push_back(r.N_max / r.lambda);
    detail += fmt("lambda=%.3f N_max=%.3f N/lambda=%.3f (%d balls r=%.3f); ", r.lambda, r.N_max,
                  r.N_max / r.lambda, r.cover_count, r.cover_radius);
  }
  const double band = spread(ratios) + 1.0;
  return make(8, band <= cfg.tolerances.doubling_band,
              detail + fmt("band=%.3f (max %.2f)", band, cfg.tolerances.doubling_band));
}

CheckResult check_cube_counting(const ExperimentConfig& cfg) {
  const auto u = real_power(wide_square(cfg), 12);
  const Cube<2> Q{Point2::Zero(), 2.0};
  const CubeLattice lattice{cfg.lattice.centers_per_axis, cfg.lattice.radii, cfg.lattice.refine};
  const double NQ = uniform_doubling_index(u, Q, lattice).N;
  const int A = cfg.lattice.parts;
  const double threshold = NQ / 1.25;
  const auto counted = count_bad_subcubes(u, Q, A, threshold, lattice);

  // Oracle: every sub-cube evaluated separately on a denser lattice without refinement.
  const CubeLattice dense{2 * cfg.lattice.centers_per_axis - 5, cfg.lattice.radii + 4, false};
  int oracle = 0;
  for (const auto& q : subdivide_cube(Q, A)) {
    if (uniform_doubling_index(u, q, dense).N >= threshold) ++oracle;
  }
  const int limit = A / 2;
  const bool ok = counted.count <= limit && counted.count == oracle;
  return make(9, ok,
              fmt("N(Q)=%.4f threshold=%.4f bad=%d oracle=%d limit=%d", NQ, threshold,
                  counted.count, oracle, limit));
}

CheckResult check_barycenter_gain(const ExperimentConfig& cfg) {
  const Grid g = wide_square(cfg);
  Simplex<2> triangle;
  const double circumradius = 0.3 / std::sqrt(3.0);
  for (int i = 0; i < 3; ++i) {
    const double a = std::numbers::pi / 2 + 2 * std::numbers::pi * i / 3;
    triangle.vertices[i] = circumradius * Point2(std::cos(a), std::sin(a));
  }
  bool ok = true;
  std::string detail;
  for (int k : {4, 6, 8}) {
    const auto rep = barycenter_test(real_power(g, k), triangle, 2.0);
    ok = ok && !rep.degenerate && rep.gain > 1.0;
    detail += fmt("k=%d N_min=%.3f N_bary=%.3f gain=%.3f; ", k, rep.N_min, rep.N_barycenter,
                  rep.gain);
  }
  return make(10, ok, detail + "need gain > 1");
}

CheckResult check_invariant_suites(const ExperimentConfig& cfg) {
  const auto& t = cfg.tolerances;
  std::mt19937_64 rng(cfg.seed);

  // Nested cubes never gain doubling index beyond the slack.
  const auto u = real_power(wide_square(cfg), 5);
  const CubeLattice lattice{cfg.lattice.centers_per_axis, cfg.lattice.radii, cfg.lattice.refine};
  double worst_gain = -1e300;
  for (int n = 0; n < 200; ++n) {
    const double side = 0.3 + 0.7 * unit(rng);
    const Point2 c(-0.8 + 1.6 * unit(rng), -0.8 + 1.6 * unit(rng));
    const double inner = side * (0.25 + 0.5 * unit(rng));
    const double room = 0.5 * (side - inner);
    const Point2 ci = c + Point2(room * (2 * unit(rng) - 1), room * (2 * unit(rng) - 1));
    const double NQ = uniform_doubling_index(u, Cube<2>{c, side}, lattice).N;
    const double Nq = uniform_doubling_index(u, Cube<2>{ci, inner}, lattice).N;
    worst_gain = std::max(worst_gain, Nq - NQ);
  }
  const bool monotone_ok = worst_gain <= t.monotone_slack;

  // Clipped nodal length is additive over a cube partition.
  const auto curve = extract_nodal_set(ScalarField::sample(unit_square(cfg), [](const Point2& p) {
    return std::pow(std::complex<double>(p.x(), p.y()), 5).real() + 0.1;
  }));
  const Cube<2> box{Point2::Zero(), 1.8};
  double parts = 0.0;
  for (const auto& q : subdivide_cube(box, cfg.lattice.parts)) parts += length_in_region(curve, q);
  const double whole = length_in_region(curve, box);
  const double additivity = std::abs(parts - whole);
  const bool additive_ok = additivity <= t.additivity;

  // Two sweeps with the same config write the same bytes.
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const std::filesystem::path base = std::filesystem::path(cfg.output_dir) / "determinism";
  emit_outputs(base / "run1", run_steklov_sweep(cfg));
  emit_outputs(base / "run2", run_steklov_sweep(cfg));
  const std::string a = slurp(base / "run1" / "sweep.csv");
  const bool deterministic = !a.empty() && a == slurp(base / "run2" / "sweep.csv") &&
                             slurp(base / "run1" / "fit.json") == slurp(base / "run2" / "fit.json");

  // Metric distance of the glued chart stays comparable to chart distance.
  const Grid disk = Grid::disk(1.0, cfg.nr, cfg.ntheta);
  const auto spectrum = steklov_spectrum(disk, 19);
  const auto& pair = nearest_even(spectrum, 8.0);
  const auto pipe = run_transform_pipeline(pair.interior, pair.eigenvalue, Point2(1.0, 0.0),
                                           cfg.collar);
  std::vector<std::pair<Point2, Point2>> pairs;
  const double lam = pair.eigenvalue;
  while (pairs.size() < 100) {
    const double rho = 0.5 + unit(rng), phi = 2 * std::numbers::pi * unit(rng);
    const double d = (0.05 + 1.9 * unit(rng)) / lam, psi = 2 * std::numbers::pi * unit(rng);
    const Point2 x = rho * Point2(std::cos(phi), std::sin(phi));
    const Point2 y = x + d * Point2(std::cos(psi), std::sin(psi));
    if (y.norm() < 1.9) pairs.emplace_back(x, y);
  }
  const double metric = metric_distance_check(pipe.doubled, pairs, lam);
  const bool metric_ok = metric <= t.metric_ratio;

  const bool ok = monotone_ok && additive_ok && deterministic && metric_ok;
  return make(11, ok,
              fmt("nested cubes max N(q)-N(Q)=%.3f (slack %.2f); additivity err=%.1e (tol %.0e); "
                  "sweep bytes identical=%d; metric ratio=%.3f (max %.1f)",
                  worst_gain, t.monotone_slack, additivity, t.additivity, deterministic ? 1 : 0,
                  metric, t.metric_ratio));
}

CheckResult run_check(int id, const ExperimentConfig& cfg) {
  using Fn = CheckResult (*)(const ExperimentConfig&);
  static constexpr Fn kChecks[] = {
      check_degree_recovery,   check_frequency_oracle,   check_growth_identity,
      check_sandwich_law,      check_steklov_spectrum,   check_nodal_length_law,
      check_transform_pipeline, check_doubling_scaling,  check_cube_counting,
      check_barycenter_gain,   check_invariant_suites};
  if (id < 1 || id > 11) throw InvalidArgument("no acceptance check with id " + std::to_string(id));
  try {
    return kChecks[id - 1](cfg);
  } catch (const Error& e) {
    return make(id, false, std::string("error: ") + e.what());
  }
}

std::string format_check(const CheckResult& r) {
  return fmt("%s %2d %-19s ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str()) + r.detail;
}

}  // namespace nodalab
