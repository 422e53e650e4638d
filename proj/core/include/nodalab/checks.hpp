#pragma once

#include <string>
#include <vector>

#include "nodalab/config.hpp"

namespace nodalab {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured quantities against their thresholds
};

// Acceptance checks. Thresholds come from cfg.tolerances; resolutions from
// cfg.nr, cfg.ntheta and cfg.rectangle_nodes.
CheckResult check_degree_recovery(const ExperimentConfig& cfg);     // 1
CheckResult check_frequency_oracle(const ExperimentConfig& cfg);    // 2
CheckResult check_growth_identity(const ExperimentConfig& cfg);     // 3
CheckResult check_sandwich_law(const ExperimentConfig& cfg);        // 4
CheckResult check_steklov_spectrum(const ExperimentConfig& cfg);    // 5
CheckResult check_nodal_length_law(const ExperimentConfig& cfg);    // 6
CheckResult check_transform_pipeline(const ExperimentConfig& cfg);  // 7
CheckResult check_doubling_scaling(const ExperimentConfig& cfg);    // 8
CheckResult check_cube_counting(const ExperimentConfig& cfg);       // 9
CheckResult check_barycenter_gain(const ExperimentConfig& cfg);     // 10
CheckResult check_invariant_suites(const ExperimentConfig& cfg);    // 11

const char* check_name(int id);

/// Runs one check; a library error becomes a failed result carrying its message.
CheckResult run_check(int id, const ExperimentConfig& cfg);

/// "PASS  3 growth-identity  <detail>".
std::string format_check(const CheckResult& result);

}  // namespace nodalab
