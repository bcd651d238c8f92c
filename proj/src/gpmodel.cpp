#include "gpemu/gpmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpemu/error.hpp"
#include "gpemu/parallel.hpp"
#include "gpemu/rng.hpp"

namespace gpemu {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative headroom under kappa_max used when a nugget has to be computed
// from double-precision eigenvalues, whose small end is only accurate to
// about n * eps * lambda_max.
constexpr double kNuggetHeadroom = 1e-3;

// Negative variances down to this fraction of sigma^2 are rounding noise.
constexpr double kVarianceClampFraction = 1e-10;

Matrix with_nugget(const Matrix& r, double delta) {
  Matrix out = r;
  if (delta > 0.0) out.diagonal().array() += delta;
  return out;
}

// Cheap certificate: lambda_max <= max absolute row sum and
// lambda_min >= 1 / trace(R^-1) = 1 / ||L^-1||_F^2.
double kappa_upper_bound(const Matrix& m, const linalg::CholFactor& f) {
  const double row_bound = m.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix linv = f.lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(m.rows(), m.cols()));
  return row_bound * linv.squaredNorm();
}

}  // namespace

std::string_view to_string(MeanMode mode) {
  switch (mode) {
    case MeanMode::Simple: return "simple";
    case MeanMode::Ordinary: return "ordinary";
    case MeanMode::Universal: return "universal";
  }
  return "unknown";
}

MeanMode parse_mean_mode(std::string_view name) {
  if (name == "simple") return MeanMode::Simple;
  if (name == "ordinary") return MeanMode::Ordinary;
  if (name == "universal") return MeanMode::Universal;
  throw Error(ErrorKind::InvalidArgument, "unknown mean mode '" + std::string(name) + "'");
}

MeanBasis MeanBasis::constant(int d) {
  MeanBasis b;
  b.exponents.push_back(std::vector<int>(static_cast<std::size_t>(d), 0));
  return b;
}

MeanBasis MeanBasis::linear(int d) {
  MeanBasis b = constant(d);
  for (int k = 0; k < d; ++k) {
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(k)] = 1;
    b.exponents.push_back(std::move(e));
  }
  return b;
}

Vector MeanBasis::evaluate(std::span<const double> x0) const {
  Vector f(size());
  for (int j = 0; j < size(); ++j) {
    const auto& e = exponents[static_cast<std::size_t>(j)];
    if (e.size() != x0.size()) throw Error(ErrorKind::DimensionMismatch, "basis term dimension mismatch");
    double v = 1.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      for (int p = 0; p < e[k]; ++p) v *= x0[k];
    }
    f(j) = v;
  }
  return f;
}

Matrix MeanBasis::evaluate(const Design& x) const {
  Matrix f(x.n(), size());
  for (Eigen::Index i = 0; i < x.n(); ++i) f.row(i) = evaluate(x.point(i)).transpose();
  return f;
}

FitOptions FitOptions::local_budget() {
  FitOptions o;
  o.candidates_per_dim = 50;
  o.keep_per_dim = 20;
  o.clusters_per_dim = 1;
  return o;
}

void FitOptions::validate() const {
  if (!(candidates_per_dim >= keep_per_dim && keep_per_dim >= clusters_per_dim && clusters_per_dim >= 1)) {
    throw Error(ErrorKind::InvalidArgument, "fit options need candidates >= keep >= clusters >= 1");
  }
  if (!(kappa_max > 1.0)) throw Error(ErrorKind::InvalidKappaMax, "kappa_max must exceed 1");
  if (!(beta_lower < beta_upper)) throw Error(ErrorKind::DegenerateBounds, "beta search box is empty");
  if (!(delta_lower > 0.0 && delta_lower < delta_upper)) {
    throw Error(ErrorKind::DegenerateBounds, "nugget search range is empty");
  }
  if (regularization_iterations < 1) throw Error(ErrorKind::InvalidArgument, "M must be >= 1");
  if (max_iterations < 0 || !(fd_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "bad local search settings");
}

double mu_hat(const linalg::CholFactor& f, const Vector& y) {
  const Vector ones = Vector::Ones(f.size());
  const Vector rinv_one = linalg::solve_chol(f, ones);
  const Vector rinv_y = linalg::solve_chol(f, y);
  return ones.dot(rinv_y) / ones.dot(rinv_one);
}

double sigma2_hat(const linalg::CholFactor& f, const Vector& y, double mu) {
  const Vector resid = y - Vector::Constant(y.size(), mu);
  const Vector w = linalg::solve_lower(f, resid);
  return w.squaredNorm() / static_cast<double>(y.size());
}

double choose_delta(const Matrix& r, const DeltaPolicy& policy) {
  if (!(policy.kappa_max > 1.0)) throw Error(ErrorKind::InvalidKappaMax, "kappa_max must exceed 1");
  const double target = policy.kappa_max * (1.0 - kNuggetHeadroom);
  const double requested = std::max(0.0, policy.requested);
  try {
    const Matrix m = with_nugget(r, requested);
    const linalg::CholFactor f = linalg::cholesky(m);
    if (kappa_upper_bound(m, f) <= target) return requested;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(r, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "eigenvalues did not converge");
  return std::max(requested, linalg::nugget_lower_bound(solver.eigenvalues(), target));
}

namespace {

Profile profile_from_matrix(const Matrix& r, const Vector& y, MeanMode mode, const Matrix* basis_values,
                            const DeltaPolicy& policy) {
  const Eigen::Index n = r.rows();
  if (y.size() != n) throw Error(ErrorKind::DimensionMismatch, "response length does not match design");
  Profile p;
  p.delta = choose_delta(r, policy);
  p.factor = linalg::cholesky(with_nugget(r, p.delta));

  Vector resid;
  switch (mode) {
    case MeanMode::Simple:
      p.mu = 0.0;
      resid = y;
      break;
    case MeanMode::Ordinary:
      p.mu = mu_hat(p.factor, y);
      resid = y - Vector::Constant(n, p.mu);
      break;
    case MeanMode::Universal: {
      if (!basis_values || basis_values->rows() != n) {
        throw Error(ErrorKind::DimensionMismatch, "universal kriging needs basis values for every point");
      }
      const Matrix& f = *basis_values;
      const Matrix rinv_f = linalg::solve_chol(p.factor, f);
      const Matrix a = f.transpose() * rinv_f;
      const Vector b = rinv_f.transpose() * y;
      p.gamma = a.ldlt().solve(b);
      p.mu = p.gamma(0);
      resid = y - f * p.gamma;
      break;
    }
  }
  p.sigma2 = linalg::solve_lower(p.factor, resid).squaredNorm() / static_cast<double>(n);
  p.deviance = linalg::log_det(p.factor) + static_cast<double>(n) * std::log(p.sigma2) + static_cast<double>(n);
  return p;
}

}  // namespace

Profile profile_likelihood(const Design& x, const Vector& y, const CorrelationSpec& spec, MeanMode mode,
                           const Matrix* basis_values, const DeltaPolicy& policy) {
  return profile_from_matrix(corr_matrix(spec, x), y, mode, basis_values, policy);
}

double deviance(std::span<const double> beta, const Design& x, const Vector& y, const CorrelationSpec& spec_template,
                const DeltaPolicy& policy, MeanMode mode) {
  CorrelationSpec spec = spec_template;
  if (beta.size() != spec.beta.size()) throw Error(ErrorKind::DimensionMismatch, "beta length mismatch");
  spec.beta.assign(beta.begin(), beta.end());
  try {
    const Matrix f = mode == MeanMode::Universal ? MeanBasis::constant(spec.dim()).evaluate(x) : Matrix();
    return profile_likelihood(x, y, spec, mode, mode == MeanMode::Universal ? &f : nullptr, policy).deviance;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite && e.kind() != ErrorKind::ConvergenceFailure) throw;
    return kInf;
  }
}

double GpModel::trend(std::span<const double> x0) const {
  switch (mean_mode) {
    case MeanMode::Simple: return 0.0;
    case MeanMode::Ordinary: return mu_hat;
    case MeanMode::Universal: return basis.evaluate(x0).dot(gamma_hat);
  }
  return 0.0;
}

void finalize_model(GpModel& model) {
  const Matrix r = with_nugget(corr_matrix(model.spec, model.X), model.delta);
  model.factor = linalg::cholesky(r);
  Vector resid = model.Y;
  for (Eigen::Index i = 0; i < model.n(); ++i) resid(i) -= model.trend(model.X.point(i));
  model.weights = linalg::solve_chol(model.factor, resid);
}

namespace {

struct Problem {
  const Design& x;
  const Vector& y;
  const CorrelationSpec& spec_template;
  const FitOptions& opts;
  MeanMode mode;
  bool noisy;
  Matrix basis_values;
  int beta_dims;
  PairDistances distances;
};

// Splits an optimization vector into the spec and the nugget request.
std::pair<CorrelationSpec, double> unpack(const Problem& p, const Vector& v) {
  CorrelationSpec spec = p.spec_template;
  for (int k = 0; k < p.beta_dims; ++k) spec.beta[static_cast<std::size_t>(k)] = v(k);
  const double requested = p.noisy ? std::pow(10.0, v(p.beta_dims)) : 0.0;
  return {spec, requested};
}

double objective(const Problem& p, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) return kInf;
  }
  auto [spec, requested] = unpack(p, v);
  try {
    const Profile prof = profile_from_matrix(p.distances.corr_matrix(spec), p.y, p.mode,
                                             p.mode == MeanMode::Universal ? &p.basis_values : nullptr,
                                             DeltaPolicy{p.opts.kappa_max, requested});
    return std::isnan(prof.deviance) ? kInf : prof.deviance;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite && e.kind() != ErrorKind::ConvergenceFailure) throw;
    return kInf;
  }
}

}  // namespace

GpModel fit_model(const Design& x, const Vector& y, const CorrelationSpec& spec_template, const FitOptions& opts,
                  MeanMode mode, bool noisy, const MeanBasis* basis, FitTrace* trace) {
  opts.validate();
  spec_template.validate();
  const Eigen::Index n = x.n();
  if (y.size() != n) throw Error(ErrorKind::DimensionMismatch, "response length does not match design");
  if (x.d() != spec_template.dim()) throw Error(ErrorKind::DimensionMismatch, "kernel dimension does not match design");
  const Eigen::Index min_points = noisy ? 3 : 2;
  if (n < min_points) {
    throw Error(ErrorKind::TooFewPoints, "need at least " + std::to_string(min_points) + " points, got " +
                                             std::to_string(n));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(y(i))) throw Error(ErrorKind::InvalidArgument, "response contains NaN or infinity");
  }

  Problem prob{x,      y,        spec_template, opts, mode, noisy, Matrix(), spec_template.has_beta() ? spec_template.dim() : 0,
               PairDistances(spec_template, x)};
  GpModel model;
  model.X = x;
  model.Y = y;
  model.spec = spec_template;
  model.mean_mode = mode;
  model.kappa_max = opts.kappa_max;
  model.noisy = noisy;
  model.input_bounds.assign(static_cast<std::size_t>(x.d()), Bounds{});

  if (mode == MeanMode::Universal) {
    if (!basis) throw Error(ErrorKind::InvalidArgument, "universal kriging needs a basis");
    if (basis->size() < 1) throw Error(ErrorKind::RankDeficientBasis, "empty basis");
    const auto& first = basis->exponents.front();
    if (std::any_of(first.begin(), first.end(), [](int e) { return e != 0; })) {
      throw Error(ErrorKind::InvalidArgument, "first basis function must be the constant");
    }
    prob.basis_values = basis->evaluate(x);
    Eigen::ColPivHouseholderQR<Matrix> qr(prob.basis_values);
    if (basis->size() > n || qr.rank() < basis->size()) {
      throw Error(ErrorKind::RankDeficientBasis, "basis matrix F is not of full column rank");
    }
    model.basis = *basis;
  }

  const double y0 = y(0);
  model.degenerate = (y.array() == y0).all();

  const int dims = prob.beta_dims + (noisy ? 1 : 0);
  Vector best_v(dims);
  if (model.degenerate || dims == 0) {
    // Nothing to estimate: a constant response is matched exactly by the
    // trend for any correlation parameters.
    for (int k = 0; k < prob.beta_dims; ++k) best_v(k) = 0.5 * (opts.beta_lower + opts.beta_upper);
    if (noisy) best_v(prob.beta_dims) = std::log10(opts.delta_lower);
  } else {
    optimize::Box box{Vector(dims), Vector(dims)};
    for (int k = 0; k < prob.beta_dims; ++k) {
      box.lower(k) = opts.beta_lower;
      box.upper(k) = opts.beta_upper;
    }
    if (noisy) {
      box.lower(prob.beta_dims) = std::log10(opts.delta_lower);
      box.upper(prob.beta_dims) = std::log10(opts.delta_upper);
    }
    optimize::MultistartOptions ms;
    ms.candidates = opts.candidates_per_dim * dims;
    ms.keep = opts.keep_per_dim * dims;
    ms.clusters = opts.clusters_per_dim * dims;
    ms.seed = opts.seed;
    ms.workers = opts.workers;
    ms.local.max_iterations = opts.max_iterations;
    ms.local.fd_step = opts.fd_step;
    ms.local.step_tolerance = opts.step_tolerance;
    optimize::MultistartResult search =
        optimize::multistart_minimize([&](const Vector& v) { return objective(prob, v); }, box, ms);
    if (!std::isfinite(search.value) && !(search.value < 0)) {
      throw Error(ErrorKind::NotPositiveDefinite, "deviance is infinite over the whole search box");
    }
    best_v = search.x;
    if (trace) trace->search = std::move(search);
  }

  auto [spec, requested] = unpack(prob, best_v);
  const Profile prof = profile_likelihood(x, y, spec, mode, mode == MeanMode::Universal ? &prob.basis_values : nullptr,
                                          DeltaPolicy{opts.kappa_max, requested});
  model.spec = spec;
  model.delta = prof.delta;
  model.mu_hat = prof.mu;
  model.sigma2_hat = prof.sigma2;
  model.gamma_hat = prof.gamma;
  model.deviance = prof.deviance;
  if (model.degenerate) {
    // Exact values for a constant response; rounding in the solves would
    // otherwise leave a tiny nonzero residual.
    model.mu_hat = mode == MeanMode::Simple ? 0.0 : y0;
    if (mode == MeanMode::Universal) {
      model.gamma_hat = Vector::Zero(model.basis.size());
      model.gamma_hat(0) = y0;
    }
    if (mode != MeanMode::Simple || y0 == 0.0) {
      model.sigma2_hat = 0.0;
      model.deviance = -kInf;
    }
  }
  finalize_model(model);
  return model;
}

GpModel fit(const Design& x, const Vector& y, const CorrelationSpec& spec_template, const FitOptions& opts) {
  return fit_model(x, y, spec_template, opts, MeanMode::Ordinary, false);
}

GpModel fit_simple(const Design& x, const Vector& y, const CorrelationSpec& spec_template, const FitOptions& opts) {
  return fit_model(x, y, spec_template, opts, MeanMode::Simple, false);
}

GpModel fit_noisy(const Design& x, const Vector& y, const CorrelationSpec& spec_template, const FitOptions& opts) {
  return fit_model(x, y, spec_template, opts, MeanMode::Ordinary, true);
}

GpModel fit_universal(const Design& x, const Vector& y, const MeanBasis& basis, const CorrelationSpec& spec_template,
                      const FitOptions& opts) {
  return fit_model(x, y, spec_template, opts, MeanMode::Universal, false, &basis);
}

Vector regularized_weights(const GpModel& model, int iterations) {
  if (iterations < 1) throw Error(ErrorKind::InvalidArgument, "M must be >= 1");
  Vector sum = model.weights;
  if (iterations == 1 || model.delta == 0.0) return sum;
  Vector term = model.weights;
  for (int k = 2; k <= iterations; ++k) {
    term = model.delta * linalg::solve_chol(model.factor, term);
    sum += term;
  }
  return sum;
}

namespace {

PredictionResult predict_with(const GpModel& model, const Vector& weights, std::span<const double> x0) {
  if (static_cast<Eigen::Index>(x0.size()) != model.d()) {
    throw Error(ErrorKind::DimensionMismatch, "query has " + std::to_string(x0.size()) + " coordinates, model has " +
                                                  std::to_string(model.d()));
  }
  const Vector r = cross_corr(model.spec, model.X, x0);
  PredictionResult out;
  out.mean = model.trend(x0) + r.dot(weights);
  const double q = linalg::solve_lower(model.factor, r).squaredNorm();
  double var = model.sigma2_hat * (1.0 - q);
  if (var < 0.0) {
    if (var >= -kVarianceClampFraction * model.sigma2_hat) {
      var = 0.0;
      out.clamped = true;
    } else {
      throw Error(ErrorKind::NumericalIntegrity, "predictive variance " + std::to_string(var) + " is negative");
    }
  }
  out.variance = var;
  return out;
}

}  // namespace

PredictionResult predict(const GpModel& model, std::span<const double> x0, int iterations) {
  return predict_with(model, regularized_weights(model, iterations), x0);
}

std::vector<PredictionResult> predict_batch(const GpModel& model, const PointMatrix& points, int iterations,
                                            int workers) {
  const Vector w = regularized_weights(model, iterations);
  std::vector<PredictionResult> out(static_cast<std::size_t>(points.rows()));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    out[i] = predict_with(model, w, {points.row(row).data(), static_cast<std::size_t>(points.cols())});
  });
  return out;
}

Vector training_fit(const GpModel& model, int iterations) {
  const Vector w = regularized_weights(model, iterations);
  Vector out(model.n());
  for (Eigen::Index i = 0; i < model.n(); ++i) out(i) = predict_with(model, w, model.X.point(i)).mean;
  return out;
}

double model_condition_number(const GpModel& model) {
  return linalg::condition_number(with_nugget(corr_matrix(model.spec, model.X), model.delta));
}

}  // namespace gpemu
