#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gpemu/design.hpp"
#include "gpemu/error.hpp"
#include "gpemu/gpmodel.hpp"
#include "gpemu/rng.hpp"
#include "gpemu/simulators.hpp"
#include "oracles.hpp"

using namespace gpemu;

namespace {

Design line(std::initializer_list<double> xs) {
  PointMatrix p(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double v : xs) p(i++, 0) = v;
  return Design(p);
}

Vector evaluate(const Design& x, double (*f)(std::span<const double>)) {
  Vector y(x.n());
  for (Eigen::Index i = 0; i < x.n(); ++i) y(i) = f(x.point(i));
  return y;
}

double smooth2(std::span<const double> x) { return std::sin(3.0 * x[0]) + std::cos(2.0 * x[1]) + x[0] * x[1]; }
double smooth1(std::span<const double> x) { return oracle::onedim_reference(x[0]); }

// Model at fixed correlation parameters with the nugget policy applied.
GpModel model_at(const Design& x, const Vector& y, const CorrelationSpec& spec, double kappa_max,
                 MeanMode mode = MeanMode::Ordinary) {
  const Profile p = profile_likelihood(x, y, spec, mode, nullptr, DeltaPolicy{kappa_max, 0.0});
  GpModel m;
  m.X = x;
  m.Y = y;
  m.spec = spec;
  m.mean_mode = mode;
  m.mu_hat = p.mu;
  m.sigma2_hat = p.sigma2;
  m.delta = p.delta;
  m.kappa_max = kappa_max;
  m.deviance = p.deviance;
  m.input_bounds.assign(static_cast<std::size_t>(x.d()), Bounds{});
  finalize_model(m);
  return m;
}

FitOptions quick_options(std::uint64_t seed) {
  FitOptions o = FitOptions::local_budget();
  o.seed = seed;
  return o;
}

}  // namespace

TEST_SUITE("gpmodel") {
  TEST_CASE("mu_hat reductions and oracle") {
    const Vector y = oracle::random_vector(5, 1);
    CHECK(mu_hat(linalg::cholesky(Matrix::Identity(5, 5)), y) == doctest::Approx(y.mean()).epsilon(1e-14));
    Vector one(1);
    one << 3.25;
    CHECK(mu_hat(linalg::cholesky(Matrix::Identity(1, 1)), one) == 3.25);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Matrix r = oracle::random_spd(6, seed);
      const Vector yy = oracle::random_vector(6, seed + 50);
      const double expected = oracle::mu_dense(r, yy);
      CHECK(std::abs(mu_hat(linalg::cholesky(r), yy) - expected) < 1e-9 * std::max(1.0, std::abs(expected)));
    }
  }

  TEST_CASE("sigma2_hat reductions and oracle") {
    const Vector c = Vector::Constant(4, 2.0);
    CHECK(sigma2_hat(linalg::cholesky(oracle::random_spd(4, 3)), c, 2.0) == 0.0);
    const Vector y = oracle::random_vector(7, 2);
    const double mu = 0.3;
    const double direct = (y.array() - mu).square().sum() / 7.0;
    CHECK(sigma2_hat(linalg::cholesky(Matrix::Identity(7, 7)), y, mu) == doctest::Approx(direct).epsilon(1e-14));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Matrix r = oracle::random_spd(6, seed + 10);
      const Vector yy = oracle::random_vector(6, seed + 60);
      const double m = oracle::mu_dense(r, yy);
      CHECK(std::abs(sigma2_hat(linalg::cholesky(r), yy, m) - oracle::sigma2_dense(r, yy, m)) <
            1e-9 * oracle::sigma2_dense(r, yy, m));
    }
  }

  TEST_CASE("deviance against a dense evaluation") {
    const Design x = line({0.1, 0.45, 0.9});
    Vector y(3);
    y << 0.3, -1.1, 0.8;
    const auto spec = CorrelationSpec::gaussian({0.4});
    const std::vector<double> beta{0.4};
    const double dev = deviance(beta, x, y, spec, DeltaPolicy{});
    const Matrix r = corr_matrix(spec, x);
    const double mu = oracle::mu_dense(r, y);
    const double s2 = oracle::sigma2_dense(r, y, mu);
    const double dense = oracle::log_det_eigen(r) + 3.0 * std::log(s2) + 3.0;
    CHECK(std::abs(dev - dense) < 1e-9);
    CHECK(deviance(beta, x, y, spec, DeltaPolicy{}) == dev);
  }

  TEST_CASE("deviance in the independence limit") {
    const Design x = lhd(8, 2, 4);
    const Vector y = evaluate(x, smooth2);
    const std::vector<double> beta{8.0, 8.0};
    const double dev = deviance(beta, x, y, CorrelationSpec::gaussian({0.0, 0.0}), DeltaPolicy{});
    const double s2 = (y.array() - y.mean()).square().sum() / 8.0;
    CHECK(dev == doctest::Approx(8.0 * std::log(s2) + 8.0).epsilon(1e-12));
  }

  TEST_CASE("duplicate inputs are handled by the nugget") {
    const Design x = line({0.2, 0.2, 0.7});
    Vector y(3);
    y << 1.0, 2.0, 3.0;
    const std::vector<double> beta{0.0};
    CHECK(std::isfinite(deviance(beta, x, y, CorrelationSpec::gaussian({0.0}), DeltaPolicy{})));
  }

  TEST_CASE("closed-form profile is the minimizer over mu and sigma2") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Design x = lhd(9, 2, seed);
      const Vector y = evaluate(x, smooth2) + 0.1 * oracle::random_vector(9, seed);
      const auto spec = CorrelationSpec::gaussian({0.5, 0.2});
      const Matrix r = corr_matrix(spec, x);
      const Profile p = profile_likelihood(x, y, spec, MeanMode::Ordinary, nullptr, DeltaPolicy{});
      REQUIRE(p.delta == 0.0);
      const double best = oracle::neg2_loglik(r, y, p.mu, p.sigma2);
      for (double dm : {-1e-2, 1e-2}) CHECK(oracle::neg2_loglik(r, y, p.mu + dm, p.sigma2) > best);
      for (double ds : {0.98, 1.02}) CHECK(oracle::neg2_loglik(r, y, p.mu, p.sigma2 * ds) > best);
      CHECK(p.deviance == doctest::Approx(best).epsilon(1e-9));
    }
  }

  TEST_CASE("choose_delta keeps the condition number under the ceiling") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Matrix r = oracle::gaussian_correlation(30, 1, -0.5, seed);
      const double delta = choose_delta(r, DeltaPolicy{1e8, 0.0});
      CHECK(delta > 0.0);
      CHECK(linalg::condition_number(r + delta * Matrix::Identity(30, 30)) <= 1e8 * (1.0 + 1e-9));
      CHECK(choose_delta(r, DeltaPolicy{1e8, 0.5}) == 0.5);
    }
    CHECK(choose_delta(Matrix::Identity(4, 4), DeltaPolicy{}) == 0.0);
    CHECK_THROWS_AS(choose_delta(Matrix::Identity(2, 2), DeltaPolicy{1.0, 0.0}), Error);
  }

  TEST_CASE("two-point hand case") {
    const Design x = line({0.0, 1.0});
    Vector y(2);
    y << 0.0, 1.0;
    const GpModel m = model_at(x, y, CorrelationSpec::gaussian({0.0}), 1e8);
    CHECK(m.mu_hat == doctest::Approx(0.5));
    const std::vector<double> mid{0.5};
    CHECK(predict(m, mid).mean == doctest::Approx(0.5).epsilon(1e-14));
    const double e = std::exp(-1.0), r0 = std::exp(-0.25);
    // r^T R^-1 r for r = (r0, r0) and R = [[1,e],[e,1]].
    const double q = 2.0 * r0 * r0 / (1.0 + e);
    CHECK(predict(m, mid).variance == doctest::Approx(m.sigma2_hat * (1.0 - q)).epsilon(1e-12));
  }

  TEST_CASE("interpolation at training points") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Design x = lhd(10, 2, seed);
      const Vector y = evaluate(x, smooth2);
      const GpModel m = model_at(x, y, CorrelationSpec::gaussian({1.0, 1.0}), 1e8);
      REQUIRE(m.delta == 0.0);
      const double range = y.maxCoeff() - y.minCoeff();
      for (Eigen::Index i = 0; i < x.n(); ++i) {
        const auto p = predict(m, x.point(i));
        CHECK(std::abs(p.mean - y(i)) < 1e-6 * range);
        CHECK(p.variance < 1e-8 * m.sigma2_hat);
      }
    }
  }

  TEST_CASE("variance never exceeds the process variance") {
    const Design x = lhd(12, 2, 7);
    const GpModel m = model_at(x, evaluate(x, smooth2), CorrelationSpec::matern({0.6, 0.3}, 2.5), 1e8);
    const Design q = lhd(200, 2, 8);
    for (const auto& p : predict_batch(m, q.points())) {
      CHECK(p.variance <= m.sigma2_hat * (1.0 + 1e-10));
      CHECK(p.variance >= 0.0);
    }
  }

  TEST_CASE("fit on the one-dimensional test function") {
    FitOptions opts;
    opts.seed = 3;
    const Design x = lhd(10, 1, 3);
    const Vector y = evaluate(x, smooth1);
    FitTrace trace;
    const GpModel m = fit_model(x, y, default_kernel(1), opts, MeanMode::Ordinary, false, nullptr, &trace);
    double sse = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const std::vector<double> q{(i + 0.5) / 1000.0};
      sse += std::pow(predict(m, q).mean - onedim_test(q[0]), 2);
    }
    CHECK(std::sqrt(sse / 1000.0) < 0.5);
    CHECK(model_condition_number(m) <= m.kappa_max * (1.0 + 1e-9));
    for (double v : trace.search.candidate_values) CHECK(m.deviance <= v);
    for (Eigen::Index i = 0; i < trace.search.starts.rows(); ++i) {
      const std::vector<double> b{trace.search.starts(i, 0)};
      CHECK(m.deviance <= deviance(b, x, y, default_kernel(1), DeltaPolicy{opts.kappa_max, 0.0}) + 1e-12);
    }
  }

  TEST_CASE("fit is reproducible and worker independent") {
    const Design x = lhd(15, 2, 1);
    const Vector y = evaluate(x, smooth2);
    FitOptions opts = quick_options(6);
    const GpModel a = fit(x, y, default_kernel(2), opts);
    opts.workers = 4;
    const GpModel b = fit(x, y, default_kernel(2), opts);
    CHECK(a.spec.beta == b.spec.beta);
    CHECK(a.deviance == b.deviance);
    CHECK(a.weights == b.weights);
  }

  TEST_CASE("translation and scale equivariance") {
    const Design x = lhd(12, 2, 5);
    const Vector y = evaluate(x, smooth2);
    const auto spec = CorrelationSpec::gaussian({0.7, 0.4});
    const GpModel base = model_at(x, y, spec, 1e8);
    const GpModel shifted = model_at(x, (y.array() + 10.0).matrix(), spec, 1e8);
    const GpModel scaled = model_at(x, 3.0 * y, spec, 1e8);
    CHECK(shifted.mu_hat == doctest::Approx(base.mu_hat + 10.0).epsilon(1e-10));
    CHECK(shifted.sigma2_hat == doctest::Approx(base.sigma2_hat).epsilon(1e-8));
    CHECK(scaled.mu_hat == doctest::Approx(3.0 * base.mu_hat).epsilon(1e-10));
    CHECK(scaled.sigma2_hat == doctest::Approx(9.0 * base.sigma2_hat).epsilon(1e-10));
    const Design q = lhd(20, 2, 6);
    for (Eigen::Index i = 0; i < q.n(); ++i) {
      const auto p0 = predict(base, q.point(i));
      const auto p1 = predict(shifted, q.point(i));
      const auto p2 = predict(scaled, q.point(i));
      CHECK(p1.mean == doctest::Approx(p0.mean + 10.0).epsilon(1e-9));
      CHECK(std::abs(p1.variance - p0.variance) < 1e-9 * base.sigma2_hat);
      CHECK(p2.mean == doctest::Approx(3.0 * p0.mean).epsilon(1e-9));
      CHECK(std::abs(p2.variance / scaled.sigma2_hat - p0.variance / base.sigma2_hat) < 1e-9);
    }
    // The fitted correlation parameters do not depend on a shift of the response.
    const FitOptions opts = quick_options(2);
    const GpModel fa = fit(x, y, default_kernel(2), opts);
    const GpModel fb = fit(x, (y.array() + 10.0).matrix(), default_kernel(2), opts);
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(fa.spec.beta[k] - fb.spec.beta[k]) < 1e-4);
  }

  TEST_CASE("constant response is degenerate") {
    const Design x = lhd(6, 2, 2);
    const Vector y = Vector::Constant(6, 4.5);
    const GpModel m = fit(x, y, default_kernel(2), quick_options(1));
    CHECK(m.degenerate);
    CHECK(m.mu_hat == 4.5);
    CHECK(m.sigma2_hat == 0.0);
    const std::vector<double> q{0.3, 0.3};
    CHECK(predict(m, q).mean == doctest::Approx(4.5));
    CHECK(predict(m, q).variance == 0.0);
  }

  TEST_CASE("fit input errors") {
    const Design one = line({0.5});
    try {
      fit(one, Vector::Ones(1), default_kernel(1), quick_options(0));
      FAIL("expected TooFewPoints");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::TooFewPoints);
    }
    const Design two = line({0.1, 0.8});
    CHECK_THROWS_AS(fit(two, Vector::Ones(3), default_kernel(1), quick_options(0)), Error);
    CHECK_THROWS_AS(fit(two, Vector::Ones(2), default_kernel(2), quick_options(0)), Error);
    CHECK_THROWS_AS(fit_noisy(two, Vector::Ones(2), default_kernel(1), quick_options(0)), Error);
    Vector bad(2);
    bad << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit(two, bad, default_kernel(1), quick_options(0)), Error);
    FitOptions o = quick_options(0);
    o.kappa_max = 0.5;
    CHECK_THROWS_AS(fit(two, Vector::Ones(2), default_kernel(1), o), Error);
  }

  TEST_CASE("every fitted model meets the nugget guarantee") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Design x = lhd(25, 1, seed);
      const Vector y = evaluate(x, smooth1);
      const GpModel m = fit(x, y, CorrelationSpec::gaussian({0.0}), quick_options(seed));
      CHECK(model_condition_number(m) <= m.kappa_max * (1.0 + 1e-9));
    }
  }

  TEST_CASE("noise-aware fit respects the nugget bound") {
    const Design x = lhd(30, 2, 3);
    Vector y = evaluate(x, smooth2);
    Rng rng(17);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.1 * rng.normal();
    const GpModel m = fit_noisy(x, y, default_kernel(2), quick_options(3));
    CHECK(m.noisy);
    const double lb = linalg::nugget_lower_bound(linalg::eigenvalues(corr_matrix(m.spec, x)), m.kappa_max);
    CHECK(m.delta >= lb);
    CHECK(m.delta >= FitOptions{}.delta_lower);
    CHECK(m.sigma2_eps() > 0.0);
    CHECK(m.sigma2_eps() < 0.1);
  }

  TEST_CASE("noise-free data pins the nugget low") {
    const Design x = lhd(12, 1, 5);
    const Vector y = evaluate(x, smooth1);
    const GpModel m = fit_noisy(x, y, CorrelationSpec::gaussian({0.0}), quick_options(5));
    const double range = y.maxCoeff() - y.minCoeff();
    CHECK(m.sigma2_eps() < 1e-4 * range * range);
  }

  TEST_CASE("universal kriging reductions") {
    const Design x = lhd(10, 2, 9);
    const Vector y = evaluate(x, smooth2);
    const auto spec = CorrelationSpec::gaussian({0.5, 0.5});
    const Matrix f0 = MeanBasis::constant(2).evaluate(x);
    const Profile ord = profile_likelihood(x, y, spec, MeanMode::Ordinary, nullptr, DeltaPolicy{});
    const Profile uk0 = profile_likelihood(x, y, spec, MeanMode::Universal, &f0, DeltaPolicy{});
    CHECK(uk0.gamma(0) == doctest::Approx(ord.mu).epsilon(1e-12));
    CHECK(uk0.deviance == doctest::Approx(ord.deviance).epsilon(1e-12));

    // gamma_hat against the explicit-inverse generalized least squares formula.
    const Matrix f1 = MeanBasis::linear(2).evaluate(x);
    const Profile uk1 = profile_likelihood(x, y, spec, MeanMode::Universal, &f1, DeltaPolicy{});
    const Matrix ri = oracle::explicit_inverse(corr_matrix(spec, x));
    const Vector g = (f1.transpose() * ri * f1).fullPivLu().solve(f1.transpose() * ri * y);
    CHECK((uk1.gamma - g).lpNorm<Eigen::Infinity>() < 1e-9 * std::max(1.0, g.lpNorm<Eigen::Infinity>()));
  }

  TEST_CASE("universal kriging with an exact linear trend") {
    const Design x = lhd(8, 2, 4);
    Vector y(8);
    for (Eigen::Index i = 0; i < 8; ++i) y(i) = 1.5 + 2.0 * x.points()(i, 0) - 0.5 * x.points()(i, 1);
    const GpModel m = fit_universal(x, y, MeanBasis::linear(2), default_kernel(2), quick_options(4));
    REQUIRE(m.gamma_hat.size() == 3);
    CHECK(m.gamma_hat(0) == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(m.gamma_hat(1) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(m.gamma_hat(2) == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(m.sigma2_hat < 1e-18);
    const std::vector<double> q{0.2, 0.9};
    CHECK(predict(m, q).mean == doctest::Approx(1.5 + 0.4 - 0.45).epsilon(1e-8));
  }

  TEST_CASE("universal kriging basis errors") {
    const Design x = lhd(5, 2, 1);
    const Vector y = evaluate(x, smooth2);
    MeanBasis dup = MeanBasis::linear(2);
    dup.exponents.push_back({1, 0});
    try {
      fit_universal(x, y, dup, default_kernel(2), quick_options(0));
      FAIL("expected RankDeficientBasis");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::RankDeficientBasis);
    }
    MeanBasis no_const;
    no_const.exponents.push_back({1, 0});
    CHECK_THROWS_AS(fit_universal(x, y, no_const, default_kernel(2), quick_options(0)), Error);
  }

  TEST_CASE("iterative regularization drives residuals down") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Design x = lhd(20, 1, seed);
      const Vector y = evaluate(x, smooth1);
      const GpModel m = model_at(x, y, CorrelationSpec::gaussian({0.3}), 1e6);
      REQUIRE(m.delta > 0.0);
      const double r1 = (training_fit(m, 1) - y).lpNorm<Eigen::Infinity>();
      const double r5 = (training_fit(m, 5) - y).lpNorm<Eigen::Infinity>();
      CHECK(r5 <= r1);
      // Weights agree with the explicit series sum_k delta^{k-1} (R + delta I)^{-k} e.
      const Matrix a = oracle::explicit_inverse(corr_matrix(m.spec, x) + m.delta * Matrix::Identity(20, 20));
      const Vector e = y - Vector::Constant(20, m.mu_hat);
      Vector expected = Vector::Zero(20), term = e;
      for (int k = 1; k <= 3; ++k) {
        term = a * term;
        expected += std::pow(m.delta, k - 1) * term;
      }
      const Vector w = regularized_weights(m, 3);
      CHECK((w - expected).lpNorm<Eigen::Infinity>() < 1e-6 * expected.lpNorm<Eigen::Infinity>());
    }
  }

  TEST_CASE("regularization leaves zero-nugget models unchanged") {
    const Design x = lhd(6, 2, 3);
    const GpModel m = model_at(x, evaluate(x, smooth2), CorrelationSpec::gaussian({1.0, 1.0}), 1e8);
    REQUIRE(m.delta == 0.0);
    CHECK(regularized_weights(m, 7) == m.weights);
    CHECK_THROWS_AS(regularized_weights(m, 0), Error);
  }

  TEST_CASE("prediction errors and batch agreement") {
    const Design x = lhd(8, 2, 3);
    const GpModel m = model_at(x, evaluate(x, smooth2), CorrelationSpec::gaussian({0.5, 0.5}), 1e8);
    const std::vector<double> bad{0.5};
    CHECK_THROWS_AS(predict(m, bad), Error);
    const Design q = lhd(30, 2, 4);
    const auto one = predict_batch(m, q.points(), 1, 1);
    const auto many = predict_batch(m, q.points(), 1, 4);
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].mean == many[i].mean);
      CHECK(one[i].variance == many[i].variance);
      const auto single = predict(m, q.point(static_cast<Eigen::Index>(i)));
      CHECK(single.mean == one[i].mean);
    }
  }

  TEST_CASE("simple kriging has zero trend") {
    const Design x = lhd(8, 1, 2);
    const Vector y = evaluate(x, smooth1);
    const GpModel m = fit_simple(x, y, default_kernel(1), quick_options(1));
    CHECK(m.mean_mode == MeanMode::Simple);
    CHECK(m.mu_hat == 0.0);
    const std::vector<double> q{0.5};
    CHECK(m.trend(q) == 0.0);
  }

  TEST_CASE("mean mode names") {
    for (auto mode : {MeanMode::Simple, MeanMode::Ordinary, MeanMode::Universal}) {
      CHECK(parse_mean_mode(to_string(mode)) == mode);
    }
    CHECK_THROWS_AS(parse_mean_mode("kriging"), Error);
  }
}
