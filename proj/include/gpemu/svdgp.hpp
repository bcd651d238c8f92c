#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gpemu/gpmodel.hpp"

namespace gpemu {

/// Thin SVD of an L x N response matrix: Y = U diag(d) V^T with k = min(L, N)
/// columns, d nonincreasing, and the first nonzero entry of each u_i
/// nonnegative.
struct SvdDecomposition {
  Vector singular_values;
  Matrix left;   // L x k
  Matrix right;  // N x k
};

/// Throws InvalidSize for L < 2 or N < 2 and InvalidArgument on NaN.
SvdDecomposition decompose(const Matrix& y);

/// Number of singular values above max(L, N) * eps * d_1.
int numerical_rank(std::span<const double> d, Eigen::Index rows, Eigen::Index cols);

/// Smallest p with sum_{i<=p} d_i^2 >= frac * sum_i d_i^2, never above the
/// numerical rank. Throws AllZeroSpectrum when every d_i is zero.
int select_p(std::span<const double> d, double frac);

/// Max-abs error of the rank-p reconstruction sum_{i<=p} d_i u_i v_i^T.
double truncation_error(const SvdDecomposition& svd, const Matrix& y, int p);

struct SvdGpOptions {
  double frac = 0.95;
  /// Subtract the per-time mean series before the decomposition.
  bool center = false;
  /// Kernel of the coefficient GPs; defaults to default_kernel(q).
  std::optional<CorrelationSpec> kernel;
  FitOptions fit;
};

struct SvdGpModel {
  int p = 0;
  Matrix basis;  // L x p, column i is d_i u_i
  std::vector<GpModel> coefficients;
  double residual_var = 0.0;
  Design X;
  Vector singular_values;  // all k values
  Vector center;           // length L; zero unless centered
  bool centered = false;

  Eigen::Index length() const { return basis.rows(); }
};

/// Fits independent zero-mean GPs to the first p right singular vectors.
/// Throws AlignmentError when the columns of y do not match the rows of x.
SvdGpModel fit_svdgp(const Design& x, const Matrix& y, const SvdGpOptions& opts);

struct SeriesPrediction {
  Vector mean;
  Vector variance;
};

/// mean_t = sum_i c_i(x0) B_ti, variance_t = sum_i s_i^2(x0) B_ti^2 + residual_var.
SeriesPrediction predict_svdgp(const SvdGpModel& model, std::span<const double> x0, int iterations = 1);

}  // namespace gpemu
