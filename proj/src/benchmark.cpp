#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "gpemu/design.hpp"
#include "gpemu/error.hpp"
#include "gpemu/format.hpp"
#include "gpemu/linalg.hpp"
#include "gpemu/rng.hpp"

namespace gpemu::linalg {

namespace {

using Clock = std::chrono::steady_clock;

struct Accumulator {
  double err_sum = 0.0;
  double err_max = 0.0;
  double time_sum = 0.0;
  int count = 0;
  int failures = 0;

  void add(double err, double seconds) {
    err_sum += err;
    err_max = std::max(err_max, err);
    time_sum += seconds;
    ++count;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

const BenchmarkRow& BenchmarkReport::row(const std::string& method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw Error(ErrorKind::InvalidArgument, "no benchmark row for method " + method);
}

std::string BenchmarkReport::to_csv(bool include_time) const {
  std::ostringstream out;
  out << "method,n,d,trials,mean_recon_err,max_recon_err,mean_time_s,failures\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.n << ',' << r.d << ',' << r.trials << ',' << format_double(r.mean_recon_err)
        << ',' << format_double(r.max_recon_err) << ',' << (include_time ? format_double(r.mean_time_s) : "0")
        << ',' << r.failures << '\n';
  }
  return out.str();
}

BenchmarkReport decomposition_benchmark(int n, int d, int trials, std::uint64_t seed, double beta_lo,
                                        double beta_hi) {
  if (n < 2 || d < 1 || trials < 1) {
    throw Error(ErrorKind::InvalidSize, "decomposition_benchmark needs n >= 2, d >= 1, trials >= 1");
  }
  Accumulator lu_acc, qr_acc, chol_acc, svd_acc;
  Rng theta_rng(derive_seed(seed, 0));

  for (int t = 0; t < trials; ++t) {
    const Design x = lhd(n, d, derive_seed(seed, 1 + static_cast<std::uint64_t>(t)));
    std::vector<double> beta(static_cast<std::size_t>(d));
    for (auto& b : beta) b = theta_rng.uniform(beta_lo, beta_hi);
    const Matrix r = corr_matrix(CorrelationSpec::gaussian(beta), x);

    {
      const auto start = Clock::now();
      Eigen::PartialPivLU<Matrix> lu(r);
      const Matrix l = lu.matrixLU().triangularView<Eigen::UnitLower>();
      const Matrix u = lu.matrixLU().triangularView<Eigen::Upper>();
      const Matrix recon = lu.permutationP().transpose() * (l * u);
      lu_acc.add(max_abs_diff(recon, r), seconds_since(start));
    }
    {
      const auto start = Clock::now();
      Eigen::HouseholderQR<Matrix> qr(r);
      const Matrix q = qr.householderQ();
      const Matrix upper = qr.matrixQR().triangularView<Eigen::Upper>();
      const Matrix recon = q * upper;
      qr_acc.add(max_abs_diff(recon, r), seconds_since(start));
    }
    {
      const auto start = Clock::now();
      try {
        const CholFactor f = cholesky(r);
        const Matrix recon = f.lower * f.lower.transpose();
        chol_acc.add(max_abs_diff(recon, r), seconds_since(start));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
        ++chol_acc.failures;
      }
    }
    {
      const auto start = Clock::now();
      try {
        const SpectralDecomp s = svd(r);
        const Matrix recon = s.left_vectors * s.singular_values.asDiagonal() * s.right_vectors.transpose();
        svd_acc.add(max_abs_diff(recon, r), seconds_since(start));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ConvergenceFailure) throw;
        ++svd_acc.failures;
      }
    }
  }

  BenchmarkReport report;
  auto emit = [&](const char* name, const Accumulator& a) {
    BenchmarkRow row;
    row.method = name;
    row.n = n;
    row.d = d;
    row.trials = trials;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.mean_recon_err = a.count > 0 ? a.err_sum / a.count : nan;
    row.max_recon_err = a.count > 0 ? a.err_max : nan;
    row.mean_time_s = a.count > 0 ? a.time_sum / a.count : nan;
    row.failures = a.failures;
    report.rows.push_back(row);
  };
  emit("LU", lu_acc);
  emit("QR", qr_acc);
  emit("Cholesky", chol_acc);
  emit("SVD", svd_acc);
  return report;
}

}  // namespace gpemu::linalg
