#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "nodalab/fields.hpp"

namespace test {

inline double re_power(const nodalab::Point2& p, int k) {
  return std::pow(std::complex<double>(p.x(), p.y()), k).real();
}

inline nodalab::ScalarField real_power(const nodalab::Grid& g, int k) {
  return nodalab::ScalarField::sample(g, [k](const nodalab::Point2& p) { return re_power(p, k); });
}

inline nodalab::Grid square(double half, int n) {
  return nodalab::Grid::rectangle(-half, half, -half, half, n, n);
}

// Scratch directory for file round trips, fresh per call.
inline std::filesystem::path scratch(const std::string& name) {
  const char* env = std::getenv("NODALAB_TEST_TMP");
  const std::filesystem::path base =
      env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "nodalab_tests";
  const auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test
