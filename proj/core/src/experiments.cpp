#include "nodalab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "json.hpp"
#include "nodalab/errors.hpp"
#include "nodalab/transform.hpp"

namespace nodalab {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Uniform in [0, 1) from the top 53 bits, identical on every platform.
double unit(std::mt19937_64& rng) { return std::ldexp(static_cast<double>(rng() >> 11), -53); }

}  // namespace

FitResult fit_exponent(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw InvalidArgument("fit_exponent: need at least 3 pairs");
  const double n = static_cast<double>(pairs.size());
  double sx = 0, sy = 0;
  for (const auto& [lambda, value] : pairs) {
    if (!(lambda > 0.0) || !(value > 0.0)) {
      throw InvalidArgument("fit_exponent: lambda and value must be positive");
    }
    sx += std::log(lambda);
    sy += std::log(value);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [lambda, value] : pairs) {
    const double dx = std::log(lambda) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(value) - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_exponent: all lambda values coincide");
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (const auto& [lambda, value] : pairs) {
    const double e = std::log(value) - (fit.intercept + fit.slope * std::log(lambda));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::vector<Point2> ball_cover(double disk_radius, double r) {
  if (!(r > 0.0) || !(disk_radius > 0.0)) {
    throw InvalidArgument("ball_cover: radii must be positive");
  }
  if (r >= disk_radius) return {Point2::Zero()};
  const double dx = std::sqrt(3.0) * r, dy = 1.5 * r;
  const double reach = disk_radius + r;
  const int rows = static_cast<int>(std::ceil(reach / dy));
  const int cols = static_cast<int>(std::ceil(reach / dx)) + 1;
  std::vector<Point2> centers;
  for (int m = -rows; m <= rows; ++m) {
    const double shift = (m % 2 != 0) ? 0.5 * dx : 0.0;
    for (int n = -cols; n <= cols; ++n) {
      const Point2 c(n * dx + shift, m * dy);
      if (c.norm() <= reach * (1.0 + 1e-12)) centers.push_back(c);
    }
  }
  return centers;
}

double cover_gap(const std::vector<Point2>& centers, double disk_radius, int samples,
                 std::uint64_t seed) {
  if (centers.empty()) throw InvalidArgument("cover_gap: no centers");
  std::mt19937_64 rng(seed);
  double gap = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double rho = disk_radius * std::sqrt(unit(rng));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const Point2 p(rho * std::cos(phi), rho * std::sin(phi));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : centers) best = std::min(best, (p - c).squaredNorm());
    gap = std::max(gap, std::sqrt(best));
  }
  return gap;
}

SweepResult run_steklov_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  using clock = std::chrono::steady_clock;
  std::vector<int> ks = cfg.k_values;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  SweepResult result;
  const Grid disk = Grid::disk(1.0, cfg.nr, cfg.ntheta);
  std::optional<SteklovSpectrum> spectrum;
  std::string spectrum_error;
  try {
    spectrum = steklov_spectrum(disk, 2 * ks.back() + 3);
  } catch (const Error& e) {
    spectrum_error = e.what();
  }

  std::mt19937_64 rng(cfg.seed);
  const CoefficientSet laplace = CoefficientSet::laplace(disk);
  for (int k : ks) {
    const double phi_angle = 2.0 * std::numbers::pi * unit(rng);
    const auto start = clock::now();
    SweepRecord rec;
    rec.k = k;
    NodalCurve curve;
    try {
      if (!spectrum) throw SolverFailure("spectrum: " + spectrum_error, 0.0);
      const auto& pair = spectrum->pairs[nearest_even_pair(*spectrum, k)];
      rec.lambda = pair.eigenvalue;
      const Point2 x0(std::cos(phi_angle), std::sin(phi_angle));
      const PipelineResult pipe =
          run_transform_pipeline(pair.interior, rec.lambda, x0, cfg.collar);
      rec.b_ratio = pipe.norms.b_over_lambda;
      rec.q_ratio = pipe.norms.q_over_lambda2;

      curve = extract_nodal_set(pair.interior);
      rec.nodal_length = curve.total_length;

      rec.cover_radius = std::max(1.0 / (4.0 * rec.lambda), cfg.lattice.standard_radius);
      const auto centers = ball_cover(1.0, rec.cover_radius);
      rec.cover_count = static_cast<int>(centers.size());
      for (const auto& c : centers) {
        rec.N_max = std::max(rec.N_max, doubling_index(pipe.doubled.values, c, rec.cover_radius).N);
      }

      result.profiles.emplace_back("k" + std::to_string(k),
                                   frequency_profile(pair.interior, laplace, Point2::Zero(),
                                                     0.3, 0.9, 7));
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.what();
      ++result.failures;
    }
    if (cfg.record_runtime) {
      rec.runtime_s = std::chrono::duration<double>(clock::now() - start).count();
    }
    result.records.push_back(rec);
    result.curves.push_back(std::move(curve));
  }

  std::vector<std::pair<double, double>> nodal, doubling;
  for (const auto& r : result.records) {
    if (!r.ok) continue;
    nodal.emplace_back(r.lambda, r.nodal_length);
    doubling.emplace_back(r.lambda, r.N_max);
  }
  try {
    if (nodal.size() >= 3) result.nodal_fit = fit_exponent(nodal);
    if (doubling.size() >= 3) result.doubling_fit = fit_exponent(doubling);
  } catch (const InvalidArgument&) {
    // Degenerate data leaves the fit unset; the rows still report it.
  }
  return result;
}

bool sweep_failed(const SweepResult& result, const ExperimentConfig& cfg) {
  if (result.records.empty()) return false;
  return result.failures >
         cfg.tolerances.failure_fraction * static_cast<double>(result.records.size());
}

void emit_outputs(const std::filesystem::path& dir, const SweepResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const auto csv_path = dir / "sweep.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot open " + csv_path.string());
  csv << "k,lambda,nodal_length,N_max,b_ratio,q_ratio,runtime_s\n";
  std::string failures;
  for (const auto& r : result.records) {
    if (!r.ok) {
      failures += "k=" + std::to_string(r.k) + ": " + r.error + "\n";
      continue;
    }
    csv << r.k << ',' << format_double(r.lambda) << ',' << format_double(r.nodal_length) << ','
        << format_double(r.N_max) << ',' << format_double(r.b_ratio) << ','
        << format_double(r.q_ratio) << ',' << format_double(r.runtime_s) << '\n';
  }
  if (!csv) throw IoError("write failed: " + csv_path.string());

  auto fit_json = [](const std::optional<FitResult>& f) -> nlohmann::json {
    if (!f) return nullptr;
    return {{"slope", f->slope}, {"intercept", f->intercept}, {"residual", f->residual}};
  };
  const nlohmann::json fits = {{"nodal_length", fit_json(result.nodal_fit)},
                               {"N_max", fit_json(result.doubling_fit)},
                               {"failures", result.failures}};
  const auto fit_path = dir / "fit.json";
  std::ofstream fit(fit_path);
  if (!fit) throw IoError("cannot open " + fit_path.string());
  fit << fits.dump(2) << '\n';
  if (!fit) throw IoError("write failed: " + fit_path.string());

  if (!failures.empty()) {
    const auto path = dir / "failures.txt";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << failures;
  }

  for (std::size_t n = 0; n < result.records.size(); ++n) {
    if (!result.records[n].ok) continue;
    write_curve_svg(dir / ("nodal_k" + std::to_string(result.records[n].k) + ".svg"),
                    result.curves[n]);
  }
  for (const auto& [name, profile] : result.profiles) {
    write_profile_csv(dir / ("profile_" + name + ".csv"), profile);
  }
}

}  // namespace nodalab
