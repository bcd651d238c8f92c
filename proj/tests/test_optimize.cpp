#include <cmath>
#include <limits>

#include "doctest.h"
#include "gpemu/error.hpp"
#include "gpemu/optimize.hpp"

using namespace gpemu;
using namespace gpemu::optimize;

namespace {

double rosenbrock(const Vector& x) {
  return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
}

Box unit_box(int d, double lo, double hi) { return {Vector::Constant(d, lo), Vector::Constant(d, hi)}; }

}  // namespace

TEST_SUITE("optimize") {
  TEST_CASE("finite-difference gradient of a quadratic") {
    const Objective f = [](const Vector& x) { return 3.0 * x(0) * x(0) + x(0) * x(1) - 2.0 * x(1); };
    Vector x(2);
    x << 0.4, -1.2;
    int evals = 0;
    const Vector g = fd_gradient(f, x, 1e-4, &evals);
    CHECK(g(0) == doctest::Approx(6.0 * 0.4 - 1.2).epsilon(1e-8));
    CHECK(g(1) == doctest::Approx(0.4 - 2.0).epsilon(1e-8));
    CHECK(evals == 4);
  }

  TEST_CASE("interior minimum of a quadratic") {
    const Objective f = [](const Vector& x) { return (x - Vector::Constant(3, 0.3)).squaredNorm(); };
    const auto res = bounded_quasi_newton(f, Vector::Constant(3, -1.5), unit_box(3, -2.0, 3.0), LocalOptions{});
    CHECK((res.x - Vector::Constant(3, 0.3)).lpNorm<Eigen::Infinity>() < 1e-5);
    CHECK(res.value < 1e-10);
  }

  TEST_CASE("minimum on the boundary") {
    const Objective f = [](const Vector& x) { return std::pow(x(0) + 5.0, 2) + std::pow(x(1) - 1.0, 2); };
    const auto res = bounded_quasi_newton(f, Vector::Constant(2, 2.0), unit_box(2, -2.0, 3.0), LocalOptions{});
    CHECK(res.x(0) == -2.0);
    CHECK(res.x(1) == doctest::Approx(1.0).epsilon(1e-5));
  }

  TEST_CASE("Rosenbrock with a generous iteration budget") {
    LocalOptions opts;
    opts.max_iterations = 2000;
    opts.step_tolerance = 1e-12;
    opts.value_tolerance = 0.0;
    Vector start(2);
    start << -1.2, 1.0;
    const auto res = bounded_quasi_newton(rosenbrock, start, unit_box(2, -2.0, 3.0), opts);
    CHECK(res.value < 1e-6);
  }

  TEST_CASE("infeasible values are avoided") {
    const Objective f = [](const Vector& x) {
      return x(0) < 0.0 ? std::numeric_limits<double>::infinity() : std::pow(x(0) - 0.5, 2);
    };
    const auto res = bounded_quasi_newton(f, Vector::Constant(1, 2.0), unit_box(1, -2.0, 3.0), LocalOptions{});
    CHECK(std::isfinite(res.value));
    CHECK(res.x(0) == doctest::Approx(0.5).epsilon(1e-4));
  }

  TEST_CASE("start is clamped into the box") {
    const Objective f = [](const Vector& x) { return x.squaredNorm(); };
    const auto res = bounded_quasi_newton(f, Vector::Constant(2, 10.0), unit_box(2, 1.0, 3.0), LocalOptions{});
    CHECK(res.x == Vector::Constant(2, 1.0));
  }

  TEST_CASE("k-means separates two blobs") {
    Matrix pts(20, 2);
    for (int i = 0; i < 10; ++i) {
      pts.row(i) << 0.01 * i, 0.0;
      pts.row(10 + i) << 5.0 + 0.01 * i, 5.0;
    }
    const auto km = kmeans(pts, 2, 3);
    REQUIRE(km.labels.size() == 20);
    for (int i = 1; i < 10; ++i) {
      CHECK(km.labels[i] == km.labels[0]);
      CHECK(km.labels[10 + i] == km.labels[10]);
    }
    CHECK(km.labels[0] != km.labels[10]);
    CHECK(kmeans(pts, 2, 3).centers == km.centers);
    CHECK_THROWS_AS(kmeans(pts, 0, 1), Error);
  }

  TEST_CASE("multistart finds the global minimum of a two-well function") {
    const Objective f = [](const Vector& x) {
      const double a = (x - Vector::Constant(2, -1.0)).squaredNorm();
      const double b = (x - Vector::Constant(2, 2.0)).squaredNorm();
      return -std::exp(-a) - 1.5 * std::exp(-b);
    };
    MultistartOptions opts;
    opts.candidates = 400;
    opts.keep = 160;
    opts.clusters = 4;
    opts.seed = 5;
    const auto res = multistart_minimize(f, unit_box(2, -2.0, 3.0), opts);
    CHECK((res.x - Vector::Constant(2, 2.0)).norm() < 1e-3);
    CHECK(res.candidate_values.size() == 400);
    CHECK(res.starts.rows() == 4);
    for (double v : res.candidate_values) CHECK(res.value <= v);
  }

  TEST_CASE("multistart is reproducible and worker independent") {
    MultistartOptions opts;
    opts.candidates = 100;
    opts.keep = 40;
    opts.clusters = 3;
    opts.seed = 9;
    const auto a = multistart_minimize(rosenbrock, unit_box(2, -2.0, 3.0), opts);
    opts.workers = 3;
    const auto b = multistart_minimize(rosenbrock, unit_box(2, -2.0, 3.0), opts);
    CHECK(a.x == b.x);
    CHECK(a.value == b.value);
    CHECK(a.candidate_values == b.candidate_values);
  }
}
