#include "gpemu/svdgp.hpp"

#include <cmath>
#include <limits>

#include "gpemu/error.hpp"
#include "gpemu/parallel.hpp"
#include "gpemu/rng.hpp"

namespace gpemu {

namespace {

// Relative slack on the cumulative energy comparison so that frac = 1 is
// reachable despite rounding in the partial sums.
constexpr double kEnergySlack = 1e-12;

}  // namespace

SvdDecomposition decompose(const Matrix& y) {
  if (y.rows() < 2 || y.cols() < 2) throw Error(ErrorKind::InvalidSize, "response matrix must be at least 2 x 2");
  if (!y.allFinite()) throw Error(ErrorKind::InvalidArgument, "response matrix contains NaN or infinity");
  Eigen::JacobiSVD<Matrix> solver(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "SVD did not converge");
  SvdDecomposition out{solver.singularValues(), solver.matrixU(), solver.matrixV()};
  for (Eigen::Index i = 0; i < out.left.cols(); ++i) {
    const double scale = out.left.col(i).cwiseAbs().maxCoeff();
    for (Eigen::Index t = 0; t < out.left.rows(); ++t) {
      const double v = out.left(t, i);
      if (std::abs(v) > 1e-12 * scale) {
        if (v < 0.0) {
          out.left.col(i) *= -1.0;
          out.right.col(i) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

int numerical_rank(std::span<const double> d, Eigen::Index rows, Eigen::Index cols) {
  if (d.empty() || !(d[0] > 0.0)) return 0;
  const double cutoff =
      static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * d[0];
  int r = 0;
  for (double v : d) {
    if (v > cutoff) ++r;
  }
  return r;
}

int select_p(std::span<const double> d, double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw Error(ErrorKind::InvalidArgument, "frac must lie in (0, 1]");
  double total = 0.0;
  for (double v : d) {
    if (!(v >= 0.0)) throw Error(ErrorKind::InvalidArgument, "singular values must be nonnegative");
    total += v * v;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::AllZeroSpectrum, "all singular values are zero");
  const auto k = static_cast<Eigen::Index>(d.size());
  const int rank = std::max(1, numerical_rank(d, k, k));
  if (frac == 1.0) return rank;
  double cum = 0.0;
  for (int p = 1; p <= rank; ++p) {
    cum += d[static_cast<std::size_t>(p - 1)] * d[static_cast<std::size_t>(p - 1)];
    if (cum >= frac * total * (1.0 - kEnergySlack)) return p;
  }
  return rank;
}

double truncation_error(const SvdDecomposition& svd, const Matrix& y, int p) {
  if (p < 0 || p > svd.singular_values.size()) throw Error(ErrorKind::InvalidArgument, "p out of range");
  const Matrix approx = svd.left.leftCols(p) * svd.singular_values.head(p).asDiagonal() *
                        svd.right.leftCols(p).transpose();
  return linalg::max_abs_diff(approx, y);
}

SvdGpModel fit_svdgp(const Design& x, const Matrix& y, const SvdGpOptions& opts) {
  if (y.cols() != x.n()) {
    throw Error(ErrorKind::AlignmentError, "response matrix has " + std::to_string(y.cols()) +
                                               " columns but the design has " + std::to_string(x.n()) + " rows");
  }
  SvdGpModel model;
  model.X = x;
  model.centered = opts.center;
  model.center = opts.center ? Vector(y.rowwise().mean()) : Vector::Zero(y.rows());
  const Matrix yc = y.colwise() - model.center;
  const SvdDecomposition svd = decompose(yc);
  model.singular_values = svd.singular_values;
  const std::span<const double> d{svd.singular_values.data(), static_cast<std::size_t>(svd.singular_values.size())};
  model.p = select_p(d, opts.frac);
  model.basis = svd.left.leftCols(model.p) * svd.singular_values.head(model.p).asDiagonal();

  const Matrix residual = yc - model.basis * svd.right.leftCols(model.p).transpose();
  model.residual_var = residual.squaredNorm() / static_cast<double>(y.size());

  model.coefficients.resize(static_cast<std::size_t>(model.p));
  const CorrelationSpec spec_template = opts.kernel ? *opts.kernel : default_kernel(static_cast<int>(x.d()));
  parallel_for(model.coefficients.size(), opts.fit.workers, [&](std::size_t i) {
    FitOptions fo = opts.fit;
    fo.seed = derive_seed(opts.fit.seed, i);
    fo.workers = 1;
    const Vector target = svd.right.col(static_cast<Eigen::Index>(i));
    model.coefficients[i] = fit_simple(x, target, spec_template, fo);
  });
  return model;
}

SeriesPrediction predict_svdgp(const SvdGpModel& model, std::span<const double> x0, int iterations) {
  if (static_cast<Eigen::Index>(x0.size()) != model.X.d()) {
    throw Error(ErrorKind::DimensionMismatch, "query dimension does not match the design");
  }
  SeriesPrediction out{model.center, Vector::Constant(model.length(), model.residual_var)};
  for (int i = 0; i < model.p; ++i) {
    const PredictionResult c = predict(model.coefficients[static_cast<std::size_t>(i)], x0, iterations);
    out.mean += c.mean * model.basis.col(i);
    out.variance += c.variance * model.basis.col(i).cwiseAbs2();
  }
  return out;
}

}  // namespace gpemu
