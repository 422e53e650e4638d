#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nodalab {

enum class ExperimentKind { SteklovSweep, FrequencySuite, CubeCount, TransformCheck };

const char* kind_name(ExperimentKind kind);
/// Throws ConfigError for unknown names.
ExperimentKind parse_kind(std::string_view name);

/// Pass/fail thresholds of the acceptance checks. All must be positive.
struct Tolerances {
  double degree_rel = 0.01;           // doubling index of x^n against n
  double beta_rel = 0.02;             // frequency of Re(z^k) against k
  double beta_monotone = 5e-3;        // allowed decrease of beta
  double growth_rel = 0.02;           // H(R2)/H(R1) against (R2/R1)^(2k+1)
  double h_over_r_drop = 1e-3;        // allowed relative decrease of H(r)/r
  double sandwich_rel = 0.02;         // growth ratio against t^3
  double sandwich_eps = 0.05;
  double eigenvalue_rel = 0.02;       // absolute for the zero eigenvalue
  double convergence_factor = 3.0;    // minimum error reduction per grid doubling
  double nodal_rel = 0.03;            // nodal length against 2 lambda
  double slope_abs = 0.05;            // fitted exponent against 1
  double collar_q_rel = 0.02;         // potential against lambda^2 + lambda / r
  double norm_variation = 0.25;       // max/min - 1 of coefficient norms over lambda
  double residual_halving = 0.3;      // relative band around a factor 2
  double doubling_band = 1.5;         // max/min of N_max / lambda
  double monotone_slack = 0.05;       // N(q) - N(Q) for nested cubes
  double additivity = 1e-9;           // partition sum of clipped nodal lengths
  double metric_ratio = 2.0;          // metric distance over chart distance
  double failure_fraction = 0.25;     // sweep rows allowed to fail

  bool operator==(const Tolerances&) const = default;
};

struct LatticeConfig {
  int centers_per_axis = 9;
  int radii = 12;
  bool refine = true;
  int parts = 9;                 // sub-cubes per axis in the counting check
  double standard_radius = 0.25;  // floor of the ball-cover radius for N_max

  bool operator==(const LatticeConfig&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SteklovSweep;
  int nr = 128;
  int ntheta = 256;
  int rectangle_nodes = 512;
  std::vector<int> k_values{2, 4, 8, 16};
  std::vector<double> lambda_values{4.0, 8.0, 16.0};
  double collar = 0.25;
  LatticeConfig lattice;
  Tolerances tolerances;
  std::vector<int> criteria;  // acceptance checks to run; empty = command default
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  bool record_runtime = false;  // runtime_s is 0 unless set, keeping outputs reproducible

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError naming the first offending field.
void validate(const ExperimentConfig& cfg);

/// JSON text. Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(std::string_view text);
std::string config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

}  // namespace nodalab
