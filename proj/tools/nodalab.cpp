#include <algorithm>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nodalab/checks.hpp"
#include "nodalab/config.hpp"
#include "nodalab/elliptic.hpp"
#include "nodalab/errors.hpp"
#include "nodalab/experiments.hpp"
#include "nodalab/growth.hpp"
#include "nodalab/nodal.hpp"
#include "nodalab/transform.hpp"

namespace fs = std::filesystem;
using namespace nodalab;

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitUsage = 2;

struct Command {
  const char* name;
  const char* help;
  std::vector<ExperimentKind> kinds;  // accepted experiment kinds; empty = any
  std::vector<int> criteria;          // checks run when the config lists none
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"spectrum", "Steklov eigenpairs of the unit disk", {ExperimentKind::SteklovSweep}, {5}},
      {"frequency", "frequency profiles of Re(z^k)", {ExperimentKind::FrequencySuite}, {2, 3}},
      {"doubling", "doubling index, sandwich and barycenter checks",
       {ExperimentKind::FrequencySuite, ExperimentKind::CubeCount}, {1, 4, 10}},
      {"nodal", "nodal curves of disk eigenfunctions", {ExperimentKind::SteklovSweep}, {6}},
      {"cubes", "bad sub-cube counting", {ExperimentKind::CubeCount}, {9}},
      {"transform", "gauge, doubling and rescaling pipeline dumps",
       {ExperimentKind::TransformCheck}, {7}},
      {"sweep", "eigenvalue sweep with fits and overlays", {ExperimentKind::SteklovSweep}, {8}},
      {"check-all", "run acceptance checks", {}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}},
  };
  return table;
}

ExperimentKind default_kind(const Command& c) {
  return c.kinds.empty() ? ExperimentKind::SteklovSweep : c.kinds.front();
}

ScalarField real_power(const Grid& g, int k) {
  return ScalarField::sample(g, [k](const Point2& p) {
    return std::pow(std::complex<double>(p.x(), p.y()), k).real();
  });
}

// Artifacts written before the checks run.
bool write_artifacts(const std::string& name, const ExperimentConfig& cfg, const fs::path& out) {
  const Grid disk = Grid::disk(1.0, cfg.nr, cfg.ntheta);
  if (name == "spectrum") {
    const int kmax = *std::max_element(cfg.k_values.begin(), cfg.k_values.end());
    const auto s = steklov_spectrum(disk, std::max(9, 2 * kmax + 1));
    write_eigenpairs(out / "eigenpairs", s.pairs);
    for (std::size_t n = 0; n < s.pairs.size(); ++n) {
      std::printf("%3zu  %.10f\n", n, s.pairs[n].eigenvalue);
    }
  } else if (name == "frequency") {
    const Grid g = Grid::rectangle(-1, 1, -1, 1, cfg.rectangle_nodes, cfg.rectangle_nodes);
    const auto K = CoefficientSet::laplace(g);
    for (int k = 1; k <= 6; ++k) {
      write_profile_csv(out / ("profile_k" + std::to_string(k) + ".csv"),
                        frequency_profile(real_power(g, k), K, Point2::Zero(), 0.1, 0.4, 13));
    }
  } else if (name == "doubling") {
    const Grid g = Grid::rectangle(-1, 1, -1, 1, cfg.rectangle_nodes, cfg.rectangle_nodes);
    std::ofstream csv(out / "doubling.csv");
    if (!csv) throw IoError("cannot open " + (out / "doubling.csv").string());
    csv << "n,radius,N,sup_inner,sup_outer\n";
    for (int n : {2, 6, 10}) {
      const auto u = ScalarField::sample(g, [n](const Point2& p) { return std::pow(p.x(), n); });
      const auto r = doubling_index(u, Point2::Zero(), 0.25);
      char line[160];
      std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g\n", n, r.radius, r.N,
                    r.sup_inner, r.sup_outer);
      csv << line;
    }
  } else if (name == "nodal") {
    std::vector<int> ks{1, 2, 4, 8};
    ks.insert(ks.end(), cfg.k_values.begin(), cfg.k_values.end());
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const auto s = steklov_spectrum(disk, 2 * ks.back() + 3);
    for (int k : ks) {
      const auto m = nodal_length_of_eigenfunction(s, k);
      write_curve_csv(out / ("nodal_k" + std::to_string(k) + ".csv"), m.curve);
      write_curve_svg(out / ("nodal_k" + std::to_string(k) + ".svg"), m.curve);
      std::printf("k=%d lambda=%.6f length=%.6f\n", k, m.eigenvalue, m.length);
    }
  } else if (name == "cubes") {
    const Grid g = Grid::rectangle(-2, 2, -2, 2, cfg.rectangle_nodes, cfg.rectangle_nodes);
    const auto u = real_power(g, 12);
    const Cube<2> Q{Point2::Zero(), 2.0};
    const CubeLattice lattice{cfg.lattice.centers_per_axis, cfg.lattice.radii,
                              cfg.lattice.refine};
    const double NQ = uniform_doubling_index(u, Q, lattice).N;
    write_cube_report_csv(out / "cubes.csv",
                          count_bad_subcubes(u, Q, cfg.lattice.parts, NQ / 1.25, lattice));
  } else if (name == "transform") {
    const int count =
        2 * static_cast<int>(std::ceil(*std::max_element(cfg.lambda_values.begin(),
                                                         cfg.lambda_values.end()))) + 3;
    const auto s = steklov_spectrum(disk, count);
    for (double target : cfg.lambda_values) {
      const auto& pair = s.pairs[nearest_even_pair(s, target)];
      const auto result =
          run_transform_pipeline(pair.interior, pair.eigenvalue, Point2(1.0, 0.0), cfg.collar);
      char dir[64];
      std::snprintf(dir, sizeof dir, "pipeline_lambda%g", target);
      write_pipeline_dump(out / dir, result);
    }
  } else if (name == "sweep") {
    const auto result = run_steklov_sweep(cfg);
    emit_outputs(out, result);
    for (const auto& r : result.records) {
      if (r.ok) {
        std::printf("k=%d lambda=%.6f length=%.6f N_max=%.4f\n", r.k, r.lambda, r.nodal_length,
                    r.N_max);
      } else {
        std::printf("k=%d failed: %s\n", r.k, r.error.c_str());
      }
    }
    if (sweep_failed(result, cfg)) {
      std::fprintf(stderr, "sweep: %d of %zu rows failed\n", result.failures,
                   result.records.size());
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nodalab: doubling indices, frequency profiles and Steklov nodal sets"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resolution;
  std::optional<std::uint64_t> seed;
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--resolution", resolution, "disk resolution as nr,ntheta");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    subs[c.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const Command* cmd = nullptr;
  for (const auto& c : commands()) {
    if (subs[c.name]->parsed()) cmd = &c;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = load_config(config_path);
      if (!cmd->kinds.empty() &&
          std::find(cmd->kinds.begin(), cmd->kinds.end(), cfg.kind) == cmd->kinds.end()) {
        throw ConfigError(std::string("experiment '") + kind_name(cfg.kind) +
                          "' does not match command '" + cmd->name + "'");
      }
    } else {
      cfg.kind = default_kind(*cmd);
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    if (!resolution.empty()) {
      const auto comma = resolution.find(',');
      if (comma == std::string::npos) throw ConfigError("--resolution expects nr,ntheta");
      try {
        cfg.nr = std::stoi(resolution.substr(0, comma));
        cfg.ntheta = std::stoi(resolution.substr(comma + 1));
      } catch (const std::exception&) {
        throw ConfigError("--resolution expects two integers, got '" + resolution + "'");
      }
    }
    validate(cfg);
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", cmd->name, e.what());
    return kExitUsage;
  }

  bool ok = true;
  try {
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    save_config(out / "config.json", cfg);
    ok = write_artifacts(cmd->name, cfg, out);
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", cmd->name, e.what());
    return kExitChecksFailed;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "%s: %s\n", cmd->name, e.what());
    return kExitChecksFailed;
  }

  const std::vector<int>& ids = cfg.criteria.empty() ? cmd->criteria : cfg.criteria;
  for (int id : ids) {
    const auto r = run_check(id, cfg);
    std::printf("%s\n", format_check(r).c_str());
    std::fflush(stdout);
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitChecksFailed;
}
