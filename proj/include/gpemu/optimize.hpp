#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gpemu/linalg.hpp"

namespace gpemu::optimize {

using Objective = std::function<double(const Vector&)>;

struct Box {
  Vector lower;
  Vector upper;

  Eigen::Index dim() const { return lower.size(); }
  Vector clamp(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

struct LocalOptions {
  int max_iterations = 100;
  double fd_step = 1e-4;          // central-difference step
  double step_tolerance = 1e-8;   // stop when the accepted step is shorter (inf-norm)
  double gradient_tolerance = 1e-6;
  double value_tolerance = 1e-10; // relative decrease
  double max_step = 1.0;          // cap on the first trial step (inf-norm)
};

struct LocalResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Central finite-difference gradient.
Vector fd_gradient(const Objective& f, const Vector& x, double step, int* evaluations = nullptr);

/// Projected BFGS on a box: finite-difference gradients, active-set
/// freezing of bound-constrained coordinates, Armijo backtracking along the
/// projected path. Objective values of +infinity are treated as infeasible.
LocalResult bounded_quasi_newton(const Objective& f, const Vector& start, const Box& box,
                                 const LocalOptions& opts);

struct KMeansResult {
  Matrix centers;            // k x dim
  std::vector<int> labels;   // per point
};

/// Lloyd iterations with k-means++ seeding drawn from `seed`. Ties go to the
/// lowest cluster index; empty clusters keep their previous center.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iterations = 25);

struct MultistartOptions {
  int candidates = 200;
  int keep = 80;
  int clusters = 2;
  std::uint64_t seed = 0;
  int workers = 1;
  LocalOptions local;
};

struct MultistartResult {
  Vector x;
  double value = 0.0;
  /// Objective at every space-filling candidate, in draw order.
  std::vector<double> candidate_values;
  Matrix candidates;
  /// Starting points of the local searches (cluster centers).
  Matrix starts;
  std::vector<LocalResult> local_results;
};

/// (1) LHD of `candidates` points over the box; (2) evaluate; (3) keep the
/// `keep` lowest; (4) k-means them into `clusters` groups; (5) local search
/// from each center; (6) return the overall lowest value, never worse than
/// the best candidate. Ties resolve to the lowest start index.
MultistartResult multistart_minimize(const Objective& f, const Box& box, const MultistartOptions& opts);

}  // namespace gpemu::optimize
