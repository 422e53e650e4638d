#include "nodalab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nodalab/errors.hpp"

namespace nodalab {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

// Field table shared by reading and writing so the two cannot drift apart.
template <typename Tol, typename Fn>
void each_tolerance(Tol& t, Fn&& fn) {
  fn("degree_rel", t.degree_rel);
  fn("beta_rel", t.beta_rel);
  fn("beta_monotone", t.beta_monotone);
  fn("growth_rel", t.growth_rel);
  fn("h_over_r_drop", t.h_over_r_drop);
  fn("sandwich_rel", t.sandwich_rel);
  fn("sandwich_eps", t.sandwich_eps);
  fn("eigenvalue_rel", t.eigenvalue_rel);
  fn("convergence_factor", t.convergence_factor);
  fn("nodal_rel", t.nodal_rel);
  fn("slope_abs", t.slope_abs);
  fn("collar_q_rel", t.collar_q_rel);
  fn("norm_variation", t.norm_variation);
  fn("residual_halving", t.residual_halving);
  fn("doubling_band", t.doubling_band);
  fn("monotone_slack", t.monotone_slack);
  fn("additivity", t.additivity);
  fn("metric_ratio", t.metric_ratio);
  fn("failure_fraction", t.failure_fraction);
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SteklovSweep: return "steklov_sweep";
    case ExperimentKind::FrequencySuite: return "frequency_suite";
    case ExperimentKind::CubeCount: return "cube_count";
    case ExperimentKind::TransformCheck: return "transform_check";
  }
  return "steklov_sweep";
}

ExperimentKind parse_kind(std::string_view name) {
  for (auto k : {ExperimentKind::SteklovSweep, ExperimentKind::FrequencySuite,
                 ExperimentKind::CubeCount, ExperimentKind::TransformCheck}) {
    if (name == kind_name(k)) return k;
  }
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.nr < 8) throw ConfigError("resolution.nr must be at least 8");
  if (cfg.ntheta < 16) throw ConfigError("resolution.ntheta must be at least 16");
  if (cfg.rectangle_nodes < 16) throw ConfigError("rectangle_nodes must be at least 16");
  if (cfg.k_values.empty()) throw ConfigError("k_values must not be empty");
  for (int k : cfg.k_values) {
    if (k < 1) throw ConfigError("k_values entries must be >= 1");
  }
  if (cfg.lambda_values.empty()) throw ConfigError("lambda_values must not be empty");
  for (double l : cfg.lambda_values) {
    if (!(l > 0.0)) throw ConfigError("lambda_values entries must be positive");
  }
  if (!(cfg.collar > 0.0 && cfg.collar < 1.0)) throw ConfigError("collar must lie in (0, 1)");
  const auto& L = cfg.lattice;
  if (L.centers_per_axis < 2) throw ConfigError("lattice.centers_per_axis must be >= 2");
  if (L.radii < 1) throw ConfigError("lattice.radii must be >= 1");
  if (L.parts < 1) throw ConfigError("lattice.parts must be >= 1");
  if (!(L.standard_radius > 0.0)) throw ConfigError("lattice.standard_radius must be positive");
  Tolerances t = cfg.tolerances;
  each_tolerance(t, [](const char* name, double v) {
    if (!(v > 0.0)) throw ConfigError(std::string("tolerances.") + name + " must be positive");
  });
  for (int id : cfg.criteria) {
    if (id < 1 || id > 11) throw ConfigError("criteria entries must lie in 1..11");
  }
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"experiment", "resolution", "rectangle_nodes", "k_values", "lambda_values",
                  "collar", "lattice", "tolerances", "criteria", "output_dir", "seed",
                  "record_runtime"},
                 "config");
  ExperimentConfig cfg;
  if (doc.contains("experiment")) {
    std::string name;
    read(doc, "experiment", name, "config");
    cfg.kind = parse_kind(name);
  }
  if (doc.contains("resolution")) {
    const auto& r = doc["resolution"];
    reject_unknown(r, {"nr", "ntheta"}, "resolution");
    read(r, "nr", cfg.nr, "resolution");
    read(r, "ntheta", cfg.ntheta, "resolution");
  }
  read(doc, "rectangle_nodes", cfg.rectangle_nodes, "config");
  read(doc, "k_values", cfg.k_values, "config");
  read(doc, "lambda_values", cfg.lambda_values, "config");
  read(doc, "collar", cfg.collar, "config");
  if (doc.contains("lattice")) {
    const auto& l = doc["lattice"];
    reject_unknown(l, {"centers_per_axis", "radii", "refine", "parts", "standard_radius"},
                   "lattice");
    read(l, "centers_per_axis", cfg.lattice.centers_per_axis, "lattice");
    read(l, "radii", cfg.lattice.radii, "lattice");
    read(l, "refine", cfg.lattice.refine, "lattice");
    read(l, "parts", cfg.lattice.parts, "lattice");
    read(l, "standard_radius", cfg.lattice.standard_radius, "lattice");
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    std::set<std::string> known;
    each_tolerance(cfg.tolerances, [&](const char* name, double&) { known.insert(name); });
    reject_unknown(t, known, "tolerances");
    each_tolerance(cfg.tolerances,
                   [&](const char* name, double& v) { read(t, name, v, "tolerances"); });
  }
  read(doc, "criteria", cfg.criteria, "config");
  read(doc, "output_dir", cfg.output_dir, "config");
  read(doc, "seed", cfg.seed, "config");
  read(doc, "record_runtime", cfg.record_runtime, "config");
  validate(cfg);
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json t = json::object();
  Tolerances tol = cfg.tolerances;
  each_tolerance(tol, [&](const char* name, double v) { t[name] = v; });
  const json doc = {
      {"experiment", kind_name(cfg.kind)},
      {"resolution", {{"nr", cfg.nr}, {"ntheta", cfg.ntheta}}},
      {"rectangle_nodes", cfg.rectangle_nodes},
      {"k_values", cfg.k_values},
      {"lambda_values", cfg.lambda_values},
      {"collar", cfg.collar},
      {"lattice",
       {{"centers_per_axis", cfg.lattice.centers_per_axis},
        {"radii", cfg.lattice.radii},
        {"refine", cfg.lattice.refine},
        {"parts", cfg.lattice.parts},
        {"standard_radius", cfg.lattice.standard_radius}}},
      {"tolerances", t},
      {"criteria", cfg.criteria},
      {"output_dir", cfg.output_dir},
      {"seed", cfg.seed},
      {"record_runtime", cfg.record_runtime},
  };
  return doc.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str());
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << config_to_json(cfg);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nodalab
