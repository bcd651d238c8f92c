#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gpemu/kernels.hpp"

namespace gpemu {

/// Jittered Latin hypercube: in each coordinate the n values fall one per
/// stratum [(j-1)/n, j/n), uniformly placed within the stratum.
Design lhd(int n, int d, std::uint64_t seed);

/// Random within-column swaps of two rows, accepted only when the minimum
/// pairwise distance does not decrease. Keeps the Latin property.
Design maximin_improve(const Design& x, int passes, std::uint64_t seed);

double min_pairwise_distance(const PointMatrix& x);

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// Affine map of raw inputs onto [0,1]^d. Throws DegenerateBounds when
/// lo >= hi and OutOfBounds when a value lies outside its bounds.
Design scale_to_unit(const PointMatrix& raw, const std::vector<Bounds>& bounds);
PointMatrix unscale(const Design& x, const std::vector<Bounds>& bounds);
std::vector<double> scale_point(std::span<const double> raw, const std::vector<Bounds>& bounds);

}  // namespace gpemu
