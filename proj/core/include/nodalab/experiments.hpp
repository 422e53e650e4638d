#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nodalab/config.hpp"
#include "nodalab/growth.hpp"
#include "nodalab/nodal.hpp"

namespace nodalab {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;  // log value at log lambda = 0
  double residual = 0.0;   // root mean square of the log residuals
};

/// Least squares of log(value) on log(lambda). Throws InvalidArgument for
/// fewer than 3 pairs or nonpositive entries.
FitResult fit_exponent(const std::vector<std::pair<double, double>>& pairs);

/// Centers of a hexagonal lattice (spacing sqrt(3) r, anchored at the
/// origin) whose balls of radius r cover the disk of radius R. A single
/// center when r >= R. Throws InvalidArgument unless r > 0 and R > 0.
std::vector<Point2> ball_cover(double disk_radius, double r);

/// Largest distance from `samples` seeded uniform points of the disk to the
/// nearest center. The cover is complete when this is at most r.
double cover_gap(const std::vector<Point2>& centers, double disk_radius, int samples,
                 std::uint64_t seed);

struct SweepRecord {
  int k = 0;
  double lambda = 0.0;  // computed eigenvalue
  double nodal_length = 0.0;
  double N_max = 0.0;   // max doubling index of the gauged, doubled field over the cover
  double b_ratio = 0.0;  // ||b|| / lambda
  double q_ratio = 0.0;  // ||q|| / lambda^2
  double runtime_s = 0.0;
  double cover_radius = 0.0;
  int cover_count = 0;
  bool ok = true;
  std::string error;  // stage failure when !ok
};

struct SweepResult {
  std::vector<SweepRecord> records;  // ordered by k
  std::optional<FitResult> nodal_fit;    // nodal length against lambda
  std::optional<FitResult> doubling_fit;  // N_max against lambda
  std::vector<NodalCurve> curves;         // one per successful record
  std::vector<std::pair<std::string, FrequencyProfile>> profiles;
  int failures = 0;
};

/// Per k: eigenpair nearest k with even trace, gauge, double, rescale at a
/// seeded boundary point, nodal length of the eigenfunction and max doubling
/// index over the ball cover of radius max(1/(4 lambda), standard_radius).
/// Stage failures are recorded per row.
SweepResult run_steklov_sweep(const ExperimentConfig& cfg);

/// True when more than failure_fraction of the rows failed.
bool sweep_failed(const SweepResult& result, const ExperimentConfig& cfg);

/// sweep.csv, fit.json, nodal_k<k>.svg and profile_<name>.csv in `dir`.
void emit_outputs(const std::filesystem::path& dir, const SweepResult& result);

}  // namespace nodalab
