#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpemu/linalg.hpp"

namespace gpemu {

/// Row-major n x d storage so that each point is a contiguous span.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Input design: n points in [0,1]^d, one per row.
class Design {
 public:
  Design() = default;
  /// Throws InvalidSize for an empty design and OutOfBounds for coordinates
  /// outside [0,1].
  explicit Design(PointMatrix points);

  Eigen::Index n() const { return points_.rows(); }
  Eigen::Index d() const { return points_.cols(); }
  std::span<const double> point(Eigen::Index i) const {
    return {points_.row(i).data(), static_cast<std::size_t>(points_.cols())};
  }
  const PointMatrix& points() const { return points_; }

  /// Rows selected by `rows`, in that order.
  Design subset(std::span<const Eigen::Index> rows) const;

 private:
  PointMatrix points_;
};

enum class KernelFamily { PowerExponential, Matern, CompactSupport };

std::string_view to_string(KernelFamily family);
/// Accepts the CLI names powexp, matern and compact.
KernelFamily parse_kernel_family(std::string_view name);

/// Kernel family plus hyperparameters. theta_k = 10^beta_k is stored through
/// beta; lambda and rho are conversion views only.
struct CorrelationSpec {
  KernelFamily family = KernelFamily::PowerExponential;
  std::vector<double> beta;   // log10 theta, length d (unused by CompactSupport)
  std::vector<double> power;  // p_k in [1,2], PowerExponential only
  double nu = 2.5;            // Matern only, one of 0.5, 1.5, 2.5
  std::vector<double> tau;    // support radius, CompactSupport only

  static CorrelationSpec power_exponential(std::vector<double> beta, std::vector<double> power);
  static CorrelationSpec gaussian(std::vector<double> beta);
  static CorrelationSpec matern(std::vector<double> beta, double nu);
  static CorrelationSpec compact(std::vector<double> tau);

  int dim() const;
  double theta(int k) const;
  /// Whether beta carries estimable range parameters for this family.
  bool has_beta() const { return family != KernelFamily::CompactSupport; }
  /// Throws on violated invariants (UnsupportedNu, DomainError, DimensionMismatch).
  void validate() const;
};

/// Power-exponential with p_k = 1.95 and beta_k = 0 in d dimensions.
CorrelationSpec default_kernel(int d);

double corr(const CorrelationSpec& spec, std::span<const double> xi, std::span<const double> xj);
Matrix corr_matrix(const CorrelationSpec& spec, const Design& x);
Vector cross_corr(const CorrelationSpec& spec, const Design& x, std::span<const double> x0);

/// Per-pair coordinate distances of a fixed design, transformed by the
/// template's fixed powers. Rebuilds R for new beta values without repeating
/// the pow() calls; results are bitwise equal to corr_matrix.
class PairDistances {
 public:
  PairDistances(const CorrelationSpec& spec_template, const Design& x);
  /// spec must share family, power, nu and tau with the template.
  Matrix corr_matrix(const CorrelationSpec& spec) const;

 private:
  CorrelationSpec template_;
  Eigen::Index n_ = 0;
  std::vector<double> h_;  // for j < i in column order, d values per pair
};

// Hyperparameter reparametrizations.
double theta_from_beta(double beta);
double beta_from_theta(double theta);
double theta_from_lambda(double lambda);
double lambda_from_theta(double theta);
double theta_from_rho(double rho);
double rho_from_theta(double theta);

}  // namespace gpemu
