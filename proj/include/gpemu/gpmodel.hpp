#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gpemu/design.hpp"
#include "gpemu/kernels.hpp"
#include "gpemu/linalg.hpp"
#include "gpemu/optimize.hpp"

namespace gpemu {

enum class MeanMode { Simple, Ordinary, Universal };

std::string_view to_string(MeanMode mode);
MeanMode parse_mean_mode(std::string_view name);

/// Monomial regression basis for Universal Kriging. Each term lists one
/// exponent per input coordinate; the first term must be the constant.
struct MeanBasis {
  std::vector<std::vector<int>> exponents;

  static MeanBasis constant(int d);
  /// {1, x_1, ..., x_d}
  static MeanBasis linear(int d);

  int size() const { return static_cast<int>(exponents.size()); }
  Matrix evaluate(const Design& x) const;
  Vector evaluate(std::span<const double> x0) const;
};

struct FitOptions {
  double kappa_max = linalg::kDefaultKappaMax;
  // Multistart budget, scaled by the number of optimized parameters.
  int candidates_per_dim = 200;
  int keep_per_dim = 80;
  int clusters_per_dim = 2;
  double beta_lower = -2.0;
  double beta_upper = 3.0;
  double step_tolerance = 1e-8;
  int max_iterations = 100;
  double fd_step = 1e-4;
  /// Default iteration count M of the regularized predictor.
  int regularization_iterations = 1;
  // Noisy fits: search range of the nugget.
  double delta_lower = 1e-8;
  double delta_upper = 10.0;
  std::uint64_t seed = 0;
  int workers = 1;

  /// Reduced budget for many small fits (50d / 20d / d).
  static FitOptions local_budget();
  void validate() const;
};

/// How the nugget is chosen for one correlation matrix: the requested value,
/// raised to the lower bound that keeps kappa(R + delta I) <= kappa_max.
struct DeltaPolicy {
  double kappa_max = linalg::kDefaultKappaMax;
  double requested = 0.0;
};

/// Closed-form profile of the likelihood at fixed correlation parameters.
struct Profile {
  double deviance = 0.0;
  double delta = 0.0;
  double mu = 0.0;
  double sigma2 = 0.0;
  Vector gamma;
  linalg::CholFactor factor;
};

/// (1^T R^-1 1)^-1 (1^T R^-1 Y) through two solves with the factor.
double mu_hat(const linalg::CholFactor& f, const Vector& y);
/// (Y - 1 mu)^T R^-1 (Y - 1 mu) / n
double sigma2_hat(const linalg::CholFactor& f, const Vector& y, double mu);

/// Nugget actually used for correlation matrix r under `policy`.
double choose_delta(const Matrix& r, const DeltaPolicy& policy);

/// Profiles mu / gamma and sigma^2 out of the likelihood. Throws
/// NotPositiveDefinite if R + delta I still fails to factor.
Profile profile_likelihood(const Design& x, const Vector& y, const CorrelationSpec& spec, MeanMode mode,
                           const Matrix* basis_values, const DeltaPolicy& policy);

/// log|R_delta| + n log(sigma2_hat) + n, with beta substituted into the
/// template. Returns +infinity when the matrix cannot be factored.
double deviance(std::span<const double> beta, const Design& x, const Vector& y, const CorrelationSpec& spec_template,
                const DeltaPolicy& policy, MeanMode mode = MeanMode::Ordinary);

struct GpModel {
  Design X;
  Vector Y;
  CorrelationSpec spec;
  MeanMode mean_mode = MeanMode::Ordinary;
  MeanBasis basis;    // Universal only
  Vector gamma_hat;   // Universal only
  double mu_hat = 0.0;
  double sigma2_hat = 0.0;
  double delta = 0.0;
  double kappa_max = linalg::kDefaultKappaMax;
  double deviance = 0.0;
  bool degenerate = false;  // constant response
  bool noisy = false;
  std::vector<Bounds> input_bounds;  // raw-input bounds, [0,1] when unscaled

  // Derived from the fields above.
  linalg::CholFactor factor;  // of R + delta I
  Vector weights;             // (R + delta I)^-1 (Y - trend)

  double sigma2_eps() const { return noisy ? delta * sigma2_hat : 0.0; }
  Eigen::Index n() const { return X.n(); }
  Eigen::Index d() const { return X.d(); }
  double trend(std::span<const double> x0) const;
};

/// Rebuilds the factor and weights of a model from its stored fields.
void finalize_model(GpModel& model);

/// Ordinary Kriging fit by multistart minimization of the deviance over beta.
GpModel fit(const Design& x, const Vector& y, const CorrelationSpec& spec_template, const FitOptions& opts);
/// Zero-mean (Simple Kriging) fit.
GpModel fit_simple(const Design& x, const Vector& y, const CorrelationSpec& spec_template, const FitOptions& opts);
/// Noise-aware fit; the nugget is estimated jointly with beta.
GpModel fit_noisy(const Design& x, const Vector& y, const CorrelationSpec& spec_template, const FitOptions& opts);
/// Universal Kriging with a known regression basis.
GpModel fit_universal(const Design& x, const Vector& y, const MeanBasis& basis,
                      const CorrelationSpec& spec_template, const FitOptions& opts);

/// Multistart details of the most recent fit, for diagnostics and tests.
struct FitTrace {
  optimize::MultistartResult search;
};

GpModel fit_model(const Design& x, const Vector& y, const CorrelationSpec& spec_template, const FitOptions& opts,
                  MeanMode mode, bool noisy, const MeanBasis* basis = nullptr, FitTrace* trace = nullptr);

struct PredictionResult {
  double mean = 0.0;
  double variance = 0.0;
  bool clamped = false;  // a small negative variance was clamped to zero
};

/// sum_{k=1..M} delta^{k-1} (R + delta I)^{-k} (Y - trend); M = 1 gives the
/// standard weights. Each extra iteration feeds the training residuals of the
/// previous predictor back through the same smoother.
Vector regularized_weights(const GpModel& model, int iterations);

/// BLUP mean and variance at x0. For M > 1 the mean uses the iterated
/// weights; the variance is always the single-step value.
PredictionResult predict(const GpModel& model, std::span<const double> x0, int iterations = 1);

/// Predictions at each row of `points` (unit-scaled), computed with shared
/// weights.
std::vector<PredictionResult> predict_batch(const GpModel& model, const PointMatrix& points, int iterations = 1,
                                            int workers = 1);

/// Mean predictions at the training inputs.
Vector training_fit(const GpModel& model, int iterations = 1);

/// Condition number of R + delta I for a fitted model.
double model_condition_number(const GpModel& model);

}  // namespace gpemu
