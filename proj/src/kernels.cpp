#include "gpemu/kernels.hpp"

#include <cmath>
#include <numbers>

#include "gpemu/error.hpp"

namespace gpemu {

Design::Design(PointMatrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorKind::InvalidSize, "design needs at least one point and one coordinate");
  }
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    for (Eigen::Index k = 0; k < points_.cols(); ++k) {
      const double v = points_(i, k);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::OutOfBounds, "design coordinate (" + std::to_string(i) + "," +
                                                std::to_string(k) + ") = " + std::to_string(v) +
                                                " is outside [0,1]");
      }
    }
  }
}

Design Design::subset(std::span<const Eigen::Index> rows) const {
  PointMatrix sub(static_cast<Eigen::Index>(rows.size()), d());
  for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = points_.row(rows[i]);
  return Design(std::move(sub));
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::PowerExponential: return "powexp";
    case KernelFamily::Matern: return "matern";
    case KernelFamily::CompactSupport: return "compact";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "powexp") return KernelFamily::PowerExponential;
  if (name == "matern") return KernelFamily::Matern;
  if (name == "compact") return KernelFamily::CompactSupport;
  throw Error(ErrorKind::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

CorrelationSpec default_kernel(int d) {
  if (d < 1) throw Error(ErrorKind::InvalidSize, "kernel dimension must be at least 1");
  return CorrelationSpec::power_exponential(std::vector<double>(static_cast<std::size_t>(d), 0.0),
                                            std::vector<double>(static_cast<std::size_t>(d), 1.95));
}

CorrelationSpec CorrelationSpec::power_exponential(std::vector<double> beta, std::vector<double> power) {
  CorrelationSpec s;
  s.family = KernelFamily::PowerExponential;
  s.beta = std::move(beta);
  s.power = std::move(power);
  s.validate();
  return s;
}

CorrelationSpec CorrelationSpec::gaussian(std::vector<double> beta) {
  std::vector<double> p(beta.size(), 2.0);
  return power_exponential(std::move(beta), std::move(p));
}

CorrelationSpec CorrelationSpec::matern(std::vector<double> beta, double nu) {
  CorrelationSpec s;
  s.family = KernelFamily::Matern;
  s.beta = std::move(beta);
  s.nu = nu;
  s.validate();
  return s;
}

CorrelationSpec CorrelationSpec::compact(std::vector<double> tau) {
  CorrelationSpec s;
  s.family = KernelFamily::CompactSupport;
  s.beta.assign(tau.size(), 0.0);
  s.tau = std::move(tau);
  s.validate();
  return s;
}

int CorrelationSpec::dim() const {
  return static_cast<int>(family == KernelFamily::CompactSupport ? tau.size() : beta.size());
}

double CorrelationSpec::theta(int k) const { return theta_from_beta(beta.at(static_cast<std::size_t>(k))); }

void CorrelationSpec::validate() const {
  const int d = dim();
  if (d < 1) throw Error(ErrorKind::InvalidSize, "correlation spec needs d >= 1");
  for (double b : beta) {
    if (!std::isfinite(b)) throw Error(ErrorKind::DomainError, "beta must be finite");
  }
  switch (family) {
    case KernelFamily::PowerExponential:
      if (power.size() != beta.size()) {
        throw Error(ErrorKind::DimensionMismatch, "power and beta lengths differ");
      }
      for (double p : power) {
        if (!(p >= 1.0 && p <= 2.0)) {
          throw Error(ErrorKind::DomainError, "power " + std::to_string(p) + " outside [1,2]");
        }
      }
      break;
    case KernelFamily::Matern:
      if (nu != 0.5 && nu != 1.5 && nu != 2.5) {
        throw Error(ErrorKind::UnsupportedNu,
                    "Matern nu = " + std::to_string(nu) + " (supported: 0.5, 1.5, 2.5)");
      }
      break;
    case KernelFamily::CompactSupport:
      if (beta.size() != tau.size()) throw Error(ErrorKind::DimensionMismatch, "tau and beta lengths differ");
      for (double t : tau) {
        if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::DomainError, "tau must be positive");
      }
      break;
  }
}

namespace {

double matern_factor(double nu, double scaled) {
  // scaled = |h| * theta; closed forms of the half-integer Matern.
  if (nu == 0.5) return std::exp(-scaled);
  if (nu == 1.5) {
    const double a = std::sqrt(3.0) * scaled;
    return (1.0 + a) * std::exp(-a);
  }
  const double a = std::sqrt(5.0) * scaled;
  return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double compact_factor(double h, double tau) {
  if (h >= tau) return 0.0;
  const double t = std::numbers::pi * h / tau;
  return (1.0 - h / tau) * std::cos(t) + std::sin(t) / std::numbers::pi;
}

// Precomputed per-coordinate theta so matrix assembly avoids repeated pow().
struct Evaluator {
  const CorrelationSpec& spec;
  std::vector<double> theta;

  explicit Evaluator(const CorrelationSpec& s) : spec(s) {
    theta.resize(s.beta.size());
    for (std::size_t k = 0; k < s.beta.size(); ++k) theta[k] = theta_from_beta(s.beta[k]);
  }

  double operator()(const double* xi, const double* xj) const {
    const std::size_t d = theta.size();
    switch (spec.family) {
      case KernelFamily::PowerExponential: {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double h = std::abs(xi[k] - xj[k]);
          const double p = spec.power[k];
          s += theta[k] * (p == 2.0 ? h * h : (p == 1.0 ? h : std::pow(h, p)));
        }
        return std::exp(-s);
      }
      case KernelFamily::Matern: {
        double r = 1.0;
        for (std::size_t k = 0; k < d; ++k) r *= matern_factor(spec.nu, std::abs(xi[k] - xj[k]) * theta[k]);
        return r;
      }
      case KernelFamily::CompactSupport: {
        double r = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
          r *= compact_factor(std::abs(xi[k] - xj[k]), spec.tau[k]);
          if (r == 0.0) break;
        }
        return r;
      }
    }
    return 0.0;
  }
};

}  // namespace

double corr(const CorrelationSpec& spec, std::span<const double> xi, std::span<const double> xj) {
  const auto d = static_cast<std::size_t>(spec.dim());
  if (xi.size() != d || xj.size() != d) {
    throw Error(ErrorKind::DimensionMismatch, "corr: point dimension does not match kernel dimension " +
                                                  std::to_string(d));
  }
  spec.validate();
  return Evaluator(spec)(xi.data(), xj.data());
}

Matrix corr_matrix(const CorrelationSpec& spec, const Design& x) {
  if (x.d() != spec.dim()) throw Error(ErrorKind::DimensionMismatch, "corr_matrix: design dimension mismatch");
  spec.validate();
  const Evaluator eval(spec);
  const Eigen::Index n = x.n();
  Matrix r(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    r(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = eval(x.point(i).data(), x.point(j).data());
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

Vector cross_corr(const CorrelationSpec& spec, const Design& x, std::span<const double> x0) {
  if (x.d() != spec.dim() || static_cast<Eigen::Index>(x0.size()) != x.d()) {
    throw Error(ErrorKind::DimensionMismatch, "cross_corr: dimension mismatch");
  }
  spec.validate();
  const Evaluator eval(spec);
  Vector r(x.n());
  for (Eigen::Index i = 0; i < x.n(); ++i) r(i) = eval(x.point(i).data(), x0.data());
  return r;
}

PairDistances::PairDistances(const CorrelationSpec& spec_template, const Design& x)
    : template_(spec_template), n_(x.n()) {
  if (x.d() != spec_template.dim()) throw Error(ErrorKind::DimensionMismatch, "PairDistances: dimension mismatch");
  spec_template.validate();
  const auto d = static_cast<std::size_t>(x.d());
  h_.reserve(static_cast<std::size_t>(n_ * (n_ - 1) / 2) * d);
  for (Eigen::Index j = 0; j < n_; ++j) {
    for (Eigen::Index i = j + 1; i < n_; ++i) {
      const double* xi = x.point(i).data();
      const double* xj = x.point(j).data();
      for (std::size_t k = 0; k < d; ++k) {
        const double h = std::abs(xi[k] - xj[k]);
        if (template_.family == KernelFamily::PowerExponential) {
          const double p = template_.power[k];
          h_.push_back(p == 2.0 ? h * h : (p == 1.0 ? h : std::pow(h, p)));
        } else {
          h_.push_back(h);
        }
      }
    }
  }
}

Matrix PairDistances::corr_matrix(const CorrelationSpec& spec) const {
  if (spec.family != template_.family || spec.power != template_.power || spec.nu != template_.nu ||
      spec.tau != template_.tau || spec.dim() != template_.dim()) {
    throw Error(ErrorKind::InvalidArgument, "PairDistances: spec does not match the template");
  }
  spec.validate();
  const Evaluator eval(spec);
  const auto d = static_cast<std::size_t>(spec.dim());
  Matrix r(n_, n_);
  const double* h = h_.data();
  for (Eigen::Index j = 0; j < n_; ++j) {
    r(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n_; ++i, h += d) {
      double v = 1.0;
      switch (spec.family) {
        case KernelFamily::PowerExponential: {
          double s = 0.0;
          for (std::size_t k = 0; k < d; ++k) s += eval.theta[k] * h[k];
          v = std::exp(-s);
          break;
        }
        case KernelFamily::Matern:
          for (std::size_t k = 0; k < d; ++k) v *= matern_factor(spec.nu, h[k] * eval.theta[k]);
          break;
        case KernelFamily::CompactSupport:
          for (std::size_t k = 0; k < d; ++k) {
            v *= compact_factor(h[k], spec.tau[k]);
            if (v == 0.0) break;
          }
          break;
      }
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

double theta_from_beta(double beta) {
  if (!std::isfinite(beta)) throw Error(ErrorKind::DomainError, "beta must be finite");
  return std::pow(10.0, beta);
}

double beta_from_theta(double theta) {
  if (!(theta > 0.0)) throw Error(ErrorKind::DomainError, "theta must be positive");
  return std::log10(theta);
}

double theta_from_lambda(double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::DomainError, "lambda must be positive");
  return 1.0 / lambda;
}

double lambda_from_theta(double theta) {
  if (!(theta > 0.0)) throw Error(ErrorKind::DomainError, "theta must be positive");
  return 1.0 / theta;
}

double theta_from_rho(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::DomainError, "rho must lie in (0,1)");
  return -4.0 * std::log(rho);
}

double rho_from_theta(double theta) {
  if (!(theta > 0.0)) throw Error(ErrorKind::DomainError, "theta must be positive");
  return std::exp(-theta / 4.0);
}

}  // namespace gpemu
