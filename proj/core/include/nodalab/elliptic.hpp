#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nodalab/fields.hpp"

namespace nodalab {

namespace detail {
struct Factorization;
}

/// Finite-difference discretization of
///   Lu = d_i(a^{ij} d_j u) + b^i d_i u + c u
/// on a rectangle or disk grid, split into the block acting on interior
/// unknowns and the block coupling them to Dirichlet boundary values.
///
/// Rectangle: flux form with face-averaged a^{11}, a^{22}, 9-point cross
/// terms for a^{12}, a^{21}, central first-order terms.
/// Disk: polar flux form (isotropic a only), finite-volume row at the center.
class DiscreteOperator {
 public:
  DiscreteOperator(CoefficientSet coeffs, std::vector<std::size_t> interior,
                   std::vector<std::size_t> boundary, Eigen::SparseMatrix<double> a_ii,
                   Eigen::SparseMatrix<double> a_ib);

  const Grid& grid() const { return coeffs_.grid(); }
  const CoefficientSet& coefficients() const { return coeffs_; }

  /// Node index of each interior unknown / boundary value, in block order.
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }

  const Eigen::SparseMatrix<double>& interior_block() const { return a_ii_; }
  const Eigen::SparseMatrix<double>& boundary_block() const { return a_ib_; }

  /// Discrete Lu at the interior nodes (ordered as interior_nodes()).
  Eigen::VectorXd apply(const ScalarField& u) const;

  /// Interior values for each column of boundary data (rows ordered as
  /// boundary_nodes()). Returns node values for the whole grid, one column per
  /// right-hand side.
  Eigen::MatrixXd solve_many(const Eigen::MatrixXd& boundary_values) const;

 private:
  const detail::Factorization& factorization() const;

  CoefficientSet coeffs_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  Eigen::SparseMatrix<double> a_ii_;
  Eigen::SparseMatrix<double> a_ib_;
  std::shared_ptr<detail::Factorization> factor_;
};

/// Throws NonElliptic when the measured eta is not positive, and
/// InvalidArgument for anisotropic a on a disk grid or an extended disk.
DiscreteOperator assemble(const CoefficientSet& coeffs);
/// Resamples the coefficients onto `grid` when it differs from theirs.
DiscreteOperator assemble(const CoefficientSet& coeffs, const Grid& grid);

/// Solves Lu = 0 with u = boundary on the boundary nodes (ordered as
/// op.boundary_nodes()). Relative residual <= 1e-10 or SolverFailure.
ScalarField solve_dirichlet(const DiscreteOperator& op, const std::vector<double>& boundary,
                            FieldTag tag = FieldTag::Solution);
ScalarField solve_dirichlet(const DiscreteOperator& op,
                            const std::function<double(const Point2&)>& boundary,
                            FieldTag tag = FieldTag::Solution);

struct DtnMatrix {
  Eigen::MatrixXd matrix;       // symmetrized (M + M^T) / 2
  double asymmetry = 0.0;       // max |M - M^T| before symmetrization
  std::vector<double> weights;  // arc length per boundary node
};

/// Discrete Dirichlet-to-Neumann map of the Laplacian on a disk grid. Column j
/// is the one-sided second-order radial derivative at the boundary of the
/// harmonic extension of the j-th boundary hat function.
DtnMatrix dtn_matrix(const Grid& disk);

enum class Parity { Even, Odd, None };

struct SteklovEigenpair {
  double eigenvalue = 0.0;
  std::vector<double> trace;  // boundary values, ring nr, j = 0..ntheta-1
  ScalarField interior;
  Parity parity = Parity::None;
};

struct SteklovSpectrum {
  std::vector<SteklovEigenpair> pairs;
  double dtn_asymmetry = 0.0;
  int jacobi_sweeps = 0;
};

/// Lowest `count` Steklov eigenpairs of the unit-weight Laplacian on a disk
/// grid, ascending. Traces are normalized in the boundary inner product
/// (sum of weight * g^2 = 1). Degenerate clusters are rotated into
/// eigenvectors of the reflection theta -> -theta (Even first); the sign is
/// fixed so the largest entry of the trace is positive.
SteklovSpectrum steklov_spectrum(const Grid& disk, int count);

/// Sampled r^k cos(k theta) (Even) or r^k sin(k theta) (Odd), eigenvalue k.
SteklovEigenpair disk_analytic_eigenpair(const Grid& disk, int k, Parity parity);

struct EllipticEstimate {
  double sup_squared = 0.0;  // sup over B(x, rho) of f^2
  double integral = 0.0;     // integral of f^2 over B(x, (1 + eps) rho)
  double ratio = 0.0;        // sup_squared / integral
};

/// Throws DegenerateInput when the integral vanishes.
EllipticEstimate check_elliptic_estimate(const ScalarField& f, const Point2& x, double rho,
                                         double eps);

/// Writes <dir>/eigenpairs.csv (k,lambda,trace_file,field_file) plus one
/// trace CSV (j,theta,value) and one field snapshot per pair.
void write_eigenpairs(const std::filesystem::path& dir,
                      const std::vector<SteklovEigenpair>& pairs);

}  // namespace nodalab
