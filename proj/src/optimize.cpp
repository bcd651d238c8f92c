#include "gpemu/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gpemu/design.hpp"
#include "gpemu/error.hpp"
#include "gpemu/parallel.hpp"
#include "gpemu/rng.hpp"

namespace gpemu::optimize {

Vector fd_gradient(const Objective& f, const Vector& x, double step, int* evaluations) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + step;
    const double up = f(probe);
    probe(i) = x(i) - step;
    const double down = f(probe);
    probe(i) = x(i);
    if (evaluations) *evaluations += 2;
    const bool up_ok = std::isfinite(up);
    const bool down_ok = std::isfinite(down);
    if (up_ok && down_ok) {
      g(i) = (up - down) / (2.0 * step);
    } else if (up_ok || down_ok) {
      const double center = f(x);
      if (evaluations) ++*evaluations;
      g(i) = up_ok ? (up - center) / step : (center - down) / step;
      if (!std::isfinite(g(i))) g(i) = 0.0;
    } else {
      g(i) = 0.0;
    }
  }
  return g;
}

LocalResult bounded_quasi_newton(const Objective& f, const Vector& start, const Box& box,
                                 const LocalOptions& opts) {
  const Eigen::Index n = box.dim();
  if (start.size() != n || box.upper.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "bounded_quasi_newton: start/box dimension mismatch");
  }
  LocalResult result;
  Vector x = box.clamp(start);
  double fx = f(x);
  result.evaluations = 1;
  if (!std::isfinite(fx)) {
    result.x = x;
    result.value = fx;
    return result;
  }
  Vector g = fd_gradient(f, x, opts.fd_step, &result.evaluations);
  Matrix h = Matrix::Identity(n, n);
  bool h_is_identity = true;

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    std::vector<bool> active(static_cast<std::size_t>(n), false);
    double pg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lower = x(i) <= box.lower(i) && g(i) > 0.0;
      const bool at_upper = x(i) >= box.upper(i) && g(i) < 0.0;
      active[static_cast<std::size_t>(i)] = at_lower || at_upper;
      if (!active[static_cast<std::size_t>(i)]) pg = std::max(pg, std::abs(g(i)));
    }
    if (pg < opts.gradient_tolerance) break;

    Vector gf = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[static_cast<std::size_t>(i)]) gf(i) = 0.0;
    }
    Vector p = -(h * gf);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[static_cast<std::size_t>(i)]) p(i) = 0.0;
    }
    if (!(g.dot(p) < 0.0)) {
      h.setIdentity();
      h_is_identity = true;
      p = -gf;
    }
    const double pmax = p.cwiseAbs().maxCoeff();
    if (pmax == 0.0) break;
    double alpha = std::min(1.0, opts.max_step / pmax);

    bool accepted = false;
    Vector xn;
    double fn = 0.0;
    for (int ls = 0; ls < 40; ++ls) {
      xn = box.clamp(x + alpha * p);
      fn = f(xn);
      ++result.evaluations;
      if (std::isfinite(fn) && fn <= fx + 1e-4 * g.dot(xn - x)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (h_is_identity) break;
      h.setIdentity();
      h_is_identity = true;
      continue;
    }

    const Vector s = xn - x;
    const double decrease = fx - fn;
    const Vector gn = fd_gradient(f, xn, opts.fd_step, &result.evaluations);
    const Vector y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Matrix eye = Matrix::Identity(n, n);
      h = (eye - rho * s * y.transpose()) * h * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
      h_is_identity = false;
    }
    x = xn;
    fx = fn;
    g = gn;
    if (s.cwiseAbs().maxCoeff() < opts.step_tolerance) {
      ++it;
      break;
    }
    if (decrease <= opts.value_tolerance * (1.0 + std::abs(fx))) {
      ++it;
      break;
    }
  }
  result.x = x;
  result.value = fx;
  result.iterations = it;
  return result;
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iterations) {
  const Eigen::Index m = points.rows();
  if (m == 0 || k < 1) throw Error(ErrorKind::InvalidSize, "kmeans needs points and k >= 1");
  k = static_cast<int>(std::min<Eigen::Index>(k, m));
  Rng rng(seed);
  Matrix centers(k, points.cols());

  // k-means++ seeding.
  std::vector<double> dist2(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(static_cast<std::size_t>(m));
  centers.row(0) = points.row(static_cast<Eigen::Index>(first));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double d2 = (points.row(i) - centers.row(c - 1)).squaredNorm();
      dist2[static_cast<std::size_t>(i)] = std::min(dist2[static_cast<std::size_t>(i)], d2);
      total += dist2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = m - 1;
      for (Eigen::Index i = 0; i < m; ++i) {
        target -= dist2[static_cast<std::size_t>(i)];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(m)));
    }
    centers.row(c) = points.row(pick);
  }

  KMeansResult out;
  out.labels.assign(static_cast<std::size_t>(m), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      int best = 0;
      double best_d = (points.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d2 = (points.row(i) - centers.row(c)).squaredNorm();
        if (d2 < best_d) {
          best_d = d2;
          best = c;
        }
      }
      if (out.labels[static_cast<std::size_t>(i)] != best) {
        out.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const int c = out.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
  }
  out.centers = centers;
  return out;
}

MultistartResult multistart_minimize(const Objective& f, const Box& box, const MultistartOptions& opts) {
  const Eigen::Index dim = box.dim();
  if (dim < 1) throw Error(ErrorKind::InvalidSize, "multistart needs at least one variable");
  if (!(opts.candidates >= opts.keep && opts.keep >= opts.clusters && opts.clusters >= 1)) {
    throw Error(ErrorKind::InvalidArgument, "multistart requires candidates >= keep >= clusters >= 1");
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(box.lower(i) <= box.upper(i))) throw Error(ErrorKind::DegenerateBounds, "search box has lower > upper");
  }

  MultistartResult out;
  const Design unit = lhd(opts.candidates, static_cast<int>(dim), derive_seed(opts.seed, 1));
  out.candidates.resize(opts.candidates, dim);
  for (int i = 0; i < opts.candidates; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      out.candidates(i, k) = box.lower(k) + unit.points()(i, k) * (box.upper(k) - box.lower(k));
    }
  }
  out.candidate_values.assign(static_cast<std::size_t>(opts.candidates), 0.0);
  parallel_for(static_cast<std::size_t>(opts.candidates), opts.workers, [&](std::size_t i) {
    const double v = f(out.candidates.row(static_cast<Eigen::Index>(i)).transpose());
    out.candidate_values[i] = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  });

  std::vector<int> order(static_cast<std::size_t>(opts.candidates));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return out.candidate_values[static_cast<std::size_t>(a)] < out.candidate_values[static_cast<std::size_t>(b)];
  });
  const int best_candidate = order.front();

  std::vector<int> kept;
  for (int idx : order) {
    if (static_cast<int>(kept.size()) >= opts.keep) break;
    if (std::isfinite(out.candidate_values[static_cast<std::size_t>(idx)])) kept.push_back(idx);
  }

  out.x = out.candidates.row(best_candidate).transpose();
  out.value = out.candidate_values[static_cast<std::size_t>(best_candidate)];
  if (kept.empty()) return out;

  Matrix kept_points(static_cast<Eigen::Index>(kept.size()), dim);
  for (std::size_t i = 0; i < kept.size(); ++i) kept_points.row(static_cast<Eigen::Index>(i)) = out.candidates.row(kept[i]);
  const KMeansResult km = kmeans(kept_points, opts.clusters, derive_seed(opts.seed, 2));
  out.starts = km.centers;

  out.local_results.resize(static_cast<std::size_t>(out.starts.rows()));
  parallel_for(out.local_results.size(), opts.workers, [&](std::size_t i) {
    out.local_results[i] =
        bounded_quasi_newton(f, out.starts.row(static_cast<Eigen::Index>(i)).transpose(), box, opts.local);
  });

  for (const auto& r : out.local_results) {
    if (r.value < out.value) {
      out.value = r.value;
      out.x = r.x;
    }
  }
  return out;
}

}  // namespace gpemu::optimize
