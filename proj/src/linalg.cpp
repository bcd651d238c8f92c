#include "gpemu/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "gpemu/error.hpp"

namespace gpemu::linalg {

namespace {

using LdMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct EigenSystem {
  Vector values;   // nonincreasing
  Matrix vectors;  // columns match values
};

EigenSystem extended_eigensystem(const Matrix& m, bool with_vectors) {
  const LdMatrix ld = m.cast<long double>();
  Eigen::SelfAdjointEigenSolver<LdMatrix> solver(
      ld, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  const Eigen::Index n = m.rows();
  EigenSystem out;
  out.values.resize(n);
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = static_cast<double>(solver.eigenvalues()(n - 1 - i));
  }
  if (with_vectors) {
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i).cast<double>();
    }
  }
  return out;
}

}  // namespace

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": expected a nonempty square matrix, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_symmetric(const Matrix& m, const char* what) {
  require_square(m, what);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      if (!(std::abs(m(i, j) - m(j, i)) <= 1e-12 * scale)) {
        throw Error(ErrorKind::InvalidArgument, std::string(what) + ": matrix is not symmetric");
      }
    }
  }
}

CholFactor cholesky(const Matrix& m) {
  require_symmetric(m, "cholesky");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "nonpositive pivot in Cholesky factorization");
  }
  CholFactor f;
  f.lower = llt.matrixL();
  return f;
}

Vector solve_chol(const CholFactor& f, const Vector& w) {
  if (w.size() != f.size()) {
    throw Error(ErrorKind::DimensionMismatch, "solve_chol: right-hand side has length " +
                                                  std::to_string(w.size()) + ", factor order " +
                                                  std::to_string(f.size()));
  }
  Vector y = f.lower.triangularView<Eigen::Lower>().solve(w);
  return f.lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix solve_chol(const CholFactor& f, const Matrix& w) {
  if (w.rows() != f.size()) {
    throw Error(ErrorKind::DimensionMismatch, "solve_chol: right-hand side row count mismatch");
  }
  Matrix y = f.lower.triangularView<Eigen::Lower>().solve(w);
  return f.lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Vector solve_lower(const CholFactor& f, const Vector& w) {
  if (w.size() != f.size()) {
    throw Error(ErrorKind::DimensionMismatch, "solve_lower: right-hand side length mismatch");
  }
  return f.lower.triangularView<Eigen::Lower>().solve(w);
}

double log_det(const CholFactor& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) s += std::log(f.lower(i, i));
  return 2.0 * s;
}

Vector eigenvalues(const Matrix& m) {
  require_symmetric(m, "eigenvalues");
  return extended_eigensystem(m, false).values;
}

SpectralDecomp svd(const Matrix& m) {
  require_symmetric(m, "svd");
  EigenSystem es = extended_eigensystem(m, true);
  const Eigen::Index n = m.rows();

  // Singular values are |lambda|; a negative eigenvalue flips the sign of the
  // right vector.
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(es.values(a)) > std::abs(es.values(b));
  });

  SpectralDecomp out;
  out.singular_values.resize(n);
  out.left_vectors.resize(n, n);
  out.right_vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[k];
    Vector u = es.vectors.col(src);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (u(i) != 0.0) {
        if (u(i) < 0.0) u = -u;
        break;
      }
    }
    const double lambda = es.values(src);
    out.singular_values(k) = std::abs(lambda);
    out.left_vectors.col(k) = u;
    out.right_vectors.col(k) = lambda < 0.0 ? Vector(-u) : u;
  }
  return out;
}

double condition_number(const Matrix& m) {
  const Vector eigs = eigenvalues(m);
  const double largest = eigs(0);
  const double smallest = eigs(eigs.size() - 1);
  if (largest <= 0.0) return std::numeric_limits<double>::infinity();
  if (smallest <= largest * std::numeric_limits<double>::epsilon()) {
    return std::numeric_limits<double>::infinity();
  }
  return largest / smallest;
}

Matrix truncated_inverse(const Matrix& m, double eta) {
  if (!(eta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "truncated_inverse: eta must be >= 0");
  const SpectralDecomp s = svd(m);
  const Eigen::Index n = m.rows();
  Matrix inv = Matrix::Zero(n, n);
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = s.singular_values(i);
    if (d > eta && d > 0.0) {
      inv.noalias() += s.right_vectors.col(i) * s.left_vectors.col(i).transpose() / d;
      ++kept;
    }
  }
  if (kept == 0) {
    throw Error(ErrorKind::AllSingularValuesTruncated,
                "no singular value exceeds eta = " + std::to_string(eta));
  }
  return inv;
}

double nugget_lower_bound(std::span<const double> eigs, double kappa_max) {
  if (!(kappa_max > 1.0)) {
    throw Error(ErrorKind::InvalidKappaMax, "kappa_max must exceed 1, got " + std::to_string(kappa_max));
  }
  if (eigs.empty()) throw Error(ErrorKind::InvalidArgument, "nugget_lower_bound: no eigenvalues");
  const auto [lo, hi] = std::minmax_element(eigs.begin(), eigs.end());
  const double bound = (*hi - kappa_max * *lo) / (kappa_max - 1.0);
  return std::max(0.0, bound);
}

double nugget_lower_bound(const Vector& eigs, double kappa_max) {
  return nugget_lower_bound(std::span<const double>(eigs.data(), static_cast<std::size_t>(eigs.size())),
                            kappa_max);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace gpemu::linalg
