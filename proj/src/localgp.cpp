#include "gpemu/localgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gpemu/error.hpp"
#include "gpemu/parallel.hpp"
#include "gpemu/rng.hpp"

namespace gpemu {

namespace {

// Target mean occupancy of a grid cell.
constexpr double kPointsPerCell = 8.0;
constexpr Eigen::Index kMaxCells = Eigen::Index{1} << 22;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double h = a[k] - b[k];
    s += h * h;
  }
  return s;
}

struct Candidate {
  double dist2;
  Eigen::Index row;
  bool operator<(const Candidate& o) const { return dist2 < o.dist2 || (dist2 == o.dist2 && row < o.row); }
};

std::vector<Eigen::Index> take_rows(std::vector<Candidate>& c, Eigen::Index n) {
  const auto count = static_cast<std::size_t>(n);
  std::partial_sort(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(count), c.end());
  std::vector<Eigen::Index> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = c[i].row;
  return out;
}

}  // namespace

BigDataset::BigDataset(Design x, Vector y, IndexPolicy policy) : x_(std::move(x)), y_(std::move(y)) {
  if (y_.size() != x_.n()) throw Error(ErrorKind::DimensionMismatch, "response length does not match design");
  const bool grid = policy == IndexPolicy::Grid || (policy == IndexPolicy::Auto && x_.n() > kGridThreshold);
  if (!grid) return;

  const auto d = static_cast<double>(x_.d());
  Eigen::Index m = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(
                                                 std::pow(static_cast<double>(x_.n()) / kPointsPerCell, 1.0 / d))));
  while (m > 1 && std::pow(static_cast<double>(m), d) > static_cast<double>(kMaxCells)) --m;
  cells_per_dim_ = m;
  Eigen::Index cells = 1;
  for (Eigen::Index k = 0; k < x_.d(); ++k) cells *= m;

  std::vector<Eigen::Index> cell_of(static_cast<std::size_t>(x_.n()));
  cell_start_.assign(static_cast<std::size_t>(cells + 1), 0);
  for (Eigen::Index i = 0; i < x_.n(); ++i) {
    Eigen::Index c = 0;
    for (Eigen::Index k = x_.d() - 1; k >= 0; --k) c = c * m + cell_coord(x_.points()(i, k));
    cell_of[static_cast<std::size_t>(i)] = c;
    ++cell_start_[static_cast<std::size_t>(c + 1)];
  }
  std::partial_sum(cell_start_.begin(), cell_start_.end(), cell_start_.begin());
  cell_rows_.resize(static_cast<std::size_t>(x_.n()));
  std::vector<Eigen::Index> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (Eigen::Index i = 0; i < x_.n(); ++i) {
    cell_rows_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(i)])]++)] = i;
  }
}

Eigen::Index BigDataset::cell_coord(double v) const {
  const auto c = static_cast<Eigen::Index>(std::floor(v * static_cast<double>(cells_per_dim_)));
  return std::clamp<Eigen::Index>(c, 0, cells_per_dim_ - 1);
}

std::vector<Eigen::Index> BigDataset::nearest(std::span<const double> x0, Eigen::Index n) const {
  if (static_cast<Eigen::Index>(x0.size()) != x_.d()) {
    throw Error(ErrorKind::DimensionMismatch, "query dimension does not match the data");
  }
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "neighborhood size must be at least 1");
  if (n > x_.n()) {
    throw Error(ErrorKind::NTooLarge, "neighborhood size " + std::to_string(n) + " exceeds data size " +
                                          std::to_string(x_.n()));
  }
  return has_index() ? nearest_grid(x0, n) : nearest_brute(x0, n);
}

std::vector<Eigen::Index> BigDataset::nearest_brute(std::span<const double> x0, Eigen::Index n) const {
  std::vector<Candidate> c(static_cast<std::size_t>(x_.n()));
  for (Eigen::Index i = 0; i < x_.n(); ++i) c[static_cast<std::size_t>(i)] = {squared_distance(x_.point(i), x0), i};
  return take_rows(c, n);
}

// Visits cells in growing Chebyshev shells around the query cell. Once the
// n-th best distance is strictly below the distance from x0 to the outside
// of the visited block, no unvisited point can enter or tie.
std::vector<Eigen::Index> BigDataset::nearest_grid(std::span<const double> x0, Eigen::Index n) const {
  const Eigen::Index d = x_.d();
  const Eigen::Index m = cells_per_dim_;
  const double width = 1.0 / static_cast<double>(m);
  std::vector<Eigen::Index> center(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) center[static_cast<std::size_t>(k)] = cell_coord(x0[static_cast<std::size_t>(k)]);

  std::vector<Candidate> found;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
  for (Eigen::Index s = 0;; ++s) {
    // Enumerate cells of the block with Chebyshev offset exactly s.
    std::vector<Eigen::Index> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    bool covers_all = true;
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      lo[ku] = std::max<Eigen::Index>(0, center[ku] - s);
      hi[ku] = std::min<Eigen::Index>(m - 1, center[ku] + s);
      if (lo[ku] > 0 || hi[ku] < m - 1) covers_all = false;
    }
    idx = lo;
    for (;;) {
      bool on_shell = false;
      for (Eigen::Index k = 0; k < d; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (std::abs(idx[ku] - center[ku]) == s) on_shell = true;
      }
      if (on_shell) {
        Eigen::Index c = 0;
        for (Eigen::Index k = d - 1; k >= 0; --k) c = c * m + idx[static_cast<std::size_t>(k)];
        for (Eigen::Index r = cell_start_[static_cast<std::size_t>(c)]; r < cell_start_[static_cast<std::size_t>(c + 1)];
             ++r) {
          const Eigen::Index row = cell_rows_[static_cast<std::size_t>(r)];
          found.push_back({squared_distance(x_.point(row), x0), row});
        }
      }
      Eigen::Index k = 0;
      while (k < d) {
        const auto ku = static_cast<std::size_t>(k);
        if (++idx[ku] <= hi[ku]) break;
        idx[ku] = lo[ku];
        ++k;
      }
      if (k == d) break;
    }
    if (covers_all) break;
    if (static_cast<Eigen::Index>(found.size()) >= n) {
      double bound = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < d; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (center[ku] - s > 0) {
          bound = std::min(bound, x0[ku] - static_cast<double>(center[ku] - s) * width);
        }
        if (center[ku] + s < m - 1) {
          bound = std::min(bound, static_cast<double>(center[ku] + s + 1) * width - x0[ku]);
        }
      }
      std::nth_element(found.begin(), found.begin() + (n - 1), found.end());
      if (found[static_cast<std::size_t>(n - 1)].dist2 < bound * bound) break;
    }
  }
  return take_rows(found, n);
}

std::vector<Eigen::Index> knn_neighborhood(const BigDataset& data, std::span<const double> x0, Eigen::Index n) {
  return data.nearest(x0, n);
}

PredictionResult predict_local(const BigDataset& data, std::span<const double> x0, Eigen::Index n,
                               const CorrelationSpec& spec_template, const FitOptions& opts) {
  std::vector<Eigen::Index> rows = knn_neighborhood(data, x0, n);
  std::sort(rows.begin(), rows.end());
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = data.y()(rows[i]);
  const GpModel model = fit(data.x().subset(rows), y, spec_template, opts);
  return predict(model, x0, opts.regularization_iterations);
}

std::vector<LocalPrediction> predict_local_batch(const BigDataset& data, const PointMatrix& x0, Eigen::Index n,
                                                 const CorrelationSpec& spec_template, const FitOptions& opts,
                                                 int workers) {
  std::vector<LocalPrediction> out(static_cast<std::size_t>(x0.rows()));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    FitOptions fo = opts;
    fo.seed = derive_seed(opts.seed, i);
    fo.workers = 1;
    const auto row = static_cast<Eigen::Index>(i);
    try {
      out[i].result = predict_local(data, {x0.row(row).data(), static_cast<std::size_t>(x0.cols())}, n,
                                    spec_template, fo);
    } catch (const Error& e) {
      out[i].ok = false;
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace gpemu
