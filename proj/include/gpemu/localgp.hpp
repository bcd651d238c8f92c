#pragma once

#include <span>
#include <string>
#include <vector>

#include "gpemu/gpmodel.hpp"

namespace gpemu {

enum class IndexPolicy { Auto, BruteForce, Grid };

/// Large immutable training set with an optional uniform grid index over
/// [0,1]^d. Auto builds the grid only above kGridThreshold points.
class BigDataset {
 public:
  static constexpr Eigen::Index kGridThreshold = 50000;

  BigDataset(Design x, Vector y, IndexPolicy policy = IndexPolicy::Auto);

  const Design& x() const { return x_; }
  const Vector& y() const { return y_; }
  Eigen::Index size() const { return x_.n(); }
  bool has_index() const { return cells_per_dim_ > 0; }

  /// Indices of the n nearest rows to x0 ordered by (distance, row index).
  std::vector<Eigen::Index> nearest(std::span<const double> x0, Eigen::Index n) const;

 private:
  std::vector<Eigen::Index> nearest_brute(std::span<const double> x0, Eigen::Index n) const;
  std::vector<Eigen::Index> nearest_grid(std::span<const double> x0, Eigen::Index n) const;
  Eigen::Index cell_coord(double v) const;

  Design x_;
  Vector y_;
  Eigen::Index cells_per_dim_ = 0;
  std::vector<Eigen::Index> cell_start_;  // CSR offsets, one per cell plus one
  std::vector<Eigen::Index> cell_rows_;   // row indices grouped by cell
};

/// Throws NTooLarge when n exceeds the data size and InvalidArgument when
/// n < 1.
std::vector<Eigen::Index> knn_neighborhood(const BigDataset& data, std::span<const double> x0, Eigen::Index n);

/// Ordinary Kriging fit on the n-neighborhood of x0 (rows taken in ascending
/// index order) followed by prediction at x0.
PredictionResult predict_local(const BigDataset& data, std::span<const double> x0, Eigen::Index n,
                               const CorrelationSpec& spec_template, const FitOptions& opts);

struct LocalPrediction {
  PredictionResult result;
  bool ok = true;
  std::string error;
};

/// predict_local at every row of x0, point i using seed
/// derive_seed(opts.seed, i). Errors are recorded per point.
std::vector<LocalPrediction> predict_local_batch(const BigDataset& data, const PointMatrix& x0, Eigen::Index n,
                                                 const CorrelationSpec& spec_template, const FitOptions& opts,
                                                 int workers);

}  // namespace gpemu
