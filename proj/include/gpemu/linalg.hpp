#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpemu {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Default ceiling on the condition number of a (nugget-inflated) correlation
/// matrix. Well below 1/eps so that solves stay trustworthy.
inline constexpr double kDefaultKappaMax = 1e8;

/// Lower-triangular Cholesky factor L with L * L^T equal to the source matrix.
struct CholFactor {
  Matrix lower;

  Eigen::Index size() const { return lower.rows(); }
};

/// Singular value decomposition U * diag(d) * V^T with d nonincreasing.
struct SpectralDecomp {
  Vector singular_values;
  Matrix left_vectors;
  Matrix right_vectors;
};

/// Throws NotPositiveDefinite when a pivot is not strictly positive. The
/// matrix is never perturbed here; callers apply a nugget instead.
CholFactor cholesky(const Matrix& m);

Vector solve_chol(const CholFactor& f, const Vector& w);
Matrix solve_chol(const CholFactor& f, const Matrix& w);

/// L^{-1} w (forward substitution only).
Vector solve_lower(const CholFactor& f, const Vector& w);

/// log|R| = 2 * sum(log L_ii).
double log_det(const CholFactor& f);

/// Eigenvalues of a symmetric matrix in nonincreasing order. Computed in
/// extended precision so that small eigenvalues of nearly singular
/// correlation matrices keep their relative accuracy.
Vector eigenvalues(const Matrix& m);

/// SVD of a symmetric matrix through its extended-precision eigensystem.
/// The first nonzero entry of every left vector is nonnegative.
SpectralDecomp svd(const Matrix& m);

/// Largest over smallest eigenvalue. Returns +infinity when the matrix is
/// singular to working precision (ratio beyond 1/eps).
double condition_number(const Matrix& m);

/// Sum over i of u_i v_i^T / d_i restricted to d_i > eta.
Matrix truncated_inverse(const Matrix& m, double eta);

/// Smallest delta >= 0 with (l_max + delta) / (l_min + delta) <= kappa_max,
/// i.e. max{0, (l_max - kappa_max * l_min) / (kappa_max - 1)}.
double nugget_lower_bound(std::span<const double> eigs, double kappa_max);
double nugget_lower_bound(const Vector& eigs, double kappa_max);

/// max_ij |a_ij - b_ij|
double max_abs_diff(const Matrix& a, const Matrix& b);

void require_square(const Matrix& m, const char* what);
void require_symmetric(const Matrix& m, const char* what);

// Decomposition accuracy study over random Gaussian correlation matrices.

struct BenchmarkRow {
  std::string method;
  int n = 0;
  int d = 0;
  int trials = 0;
  double mean_recon_err = 0.0;
  double max_recon_err = 0.0;
  double mean_time_s = 0.0;
  int failures = 0;
};

struct BenchmarkReport {
  /// Norm used for reconstruction error.
  std::string norm = "max_abs";
  std::vector<BenchmarkRow> rows;

  const BenchmarkRow& row(const std::string& method) const;
  /// method,n,d,trials,mean_recon_err,max_recon_err,mean_time_s,failures
  std::string to_csv(bool include_time = true) const;
};

/// For each trial: a jittered LHD of n points in [0,1]^d, log10 theta drawn
/// uniformly from [beta_lo, beta_hi]^d, the Gaussian correlation matrix, and
/// its reconstitution from LU, QR, Cholesky and SVD. Cholesky failures are
/// counted and excluded from its error statistics.
BenchmarkReport decomposition_benchmark(int n, int d, int trials, std::uint64_t seed,
                                        double beta_lo = -2.0, double beta_hi = 3.0);

}  // namespace linalg
}  // namespace gpemu
