#include "gpemu/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpemu/error.hpp"
#include "gpemu/rng.hpp"

namespace gpemu {

Design lhd(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) {
    throw Error(ErrorKind::InvalidSize, "lhd needs n >= 1 and d >= 1, got n=" + std::to_string(n) +
                                            " d=" + std::to_string(d));
  }
  Rng rng(seed);
  PointMatrix pts(n, d);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    for (int i = 0; i < n; ++i) {
      double v = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / n;
      // Keep the value inside its stratum despite rounding at the top edge.
      const double top = static_cast<double>(perm[static_cast<std::size_t>(i)] + 1) / n;
      if (v >= top) v = std::nextafter(top, 0.0);
      pts(i, k) = v;
    }
  }
  return Design(std::move(pts));
}

double min_pairwise_distance(const PointMatrix& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      best = std::min(best, (x.row(i) - x.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

Design maximin_improve(const Design& x, int passes, std::uint64_t seed) {
  if (passes <= 0 || x.n() < 2) return x;
  Rng rng(seed);
  PointMatrix pts = x.points();
  const auto n = static_cast<std::size_t>(x.n());
  const auto d = static_cast<std::size_t>(x.d());
  double current = min_pairwise_distance(pts);
  for (int pass = 0; pass < passes; ++pass) {
    const auto col = static_cast<Eigen::Index>(rng.below(d));
    const auto a = static_cast<Eigen::Index>(rng.below(n));
    auto b = static_cast<Eigen::Index>(rng.below(n - 1));
    if (b >= a) ++b;
    std::swap(pts(a, col), pts(b, col));
    const double candidate = min_pairwise_distance(pts);
    if (candidate >= current) {
      current = candidate;
    } else {
      std::swap(pts(a, col), pts(b, col));
    }
  }
  return Design(std::move(pts));
}

namespace {

void check_bounds(const std::vector<Bounds>& bounds, Eigen::Index d) {
  if (static_cast<Eigen::Index>(bounds.size()) != d) {
    throw Error(ErrorKind::DimensionMismatch, "bounds count does not match input dimension");
  }
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    if (!(bounds[k].lo < bounds[k].hi)) {
      throw Error(ErrorKind::DegenerateBounds, "bounds for coordinate " + std::to_string(k) +
                                                   " have lo >= hi");
    }
  }
}

}  // namespace

std::vector<double> scale_point(std::span<const double> raw, const std::vector<Bounds>& bounds) {
  check_bounds(bounds, static_cast<Eigen::Index>(raw.size()));
  std::vector<double> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double v = raw[k];
    if (!(v >= bounds[k].lo && v <= bounds[k].hi)) {
      throw Error(ErrorKind::OutOfBounds, "value " + std::to_string(v) + " outside bounds of coordinate " +
                                              std::to_string(k));
    }
    out[k] = std::clamp((v - bounds[k].lo) / (bounds[k].hi - bounds[k].lo), 0.0, 1.0);
  }
  return out;
}

Design scale_to_unit(const PointMatrix& raw, const std::vector<Bounds>& bounds) {
  check_bounds(bounds, raw.cols());
  PointMatrix out(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const auto scaled = scale_point({raw.row(i).data(), static_cast<std::size_t>(raw.cols())}, bounds);
    for (Eigen::Index k = 0; k < raw.cols(); ++k) out(i, k) = scaled[static_cast<std::size_t>(k)];
  }
  return Design(std::move(out));
}

PointMatrix unscale(const Design& x, const std::vector<Bounds>& bounds) {
  check_bounds(bounds, x.d());
  PointMatrix out(x.n(), x.d());
  for (Eigen::Index i = 0; i < x.n(); ++i) {
    for (Eigen::Index k = 0; k < x.d(); ++k) {
      const auto& b = bounds[static_cast<std::size_t>(k)];
      out(i, k) = b.lo + x.points()(i, k) * (b.hi - b.lo);
    }
  }
  return out;
}

}  // namespace gpemu
