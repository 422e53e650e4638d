#pragma once

#include <Eigen/Core>

namespace nodalab {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns matching values
  int sweeps = 0;
  double off_norm = 0.0;  // final off-diagonal Frobenius norm
};

/// Cyclic Jacobi eigensolver for a dense symmetric matrix. Stops once the
/// off-diagonal Frobenius norm drops below tol * ||A||_F; throws
/// SolverFailure (carrying the last off-diagonal norm) after max_sweeps.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-14, int max_sweeps = 60);

}  // namespace nodalab
