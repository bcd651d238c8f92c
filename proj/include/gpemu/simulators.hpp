#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gpemu {

/// Scalar-output test simulator on [0,1]^dim.
struct Simulator {
  std::string name;
  int dim = 1;
  bool deterministic = true;
  std::function<double(std::span<const double>)> evaluate;
};

/// log(x + 0.1) + sin(5 pi x) on [0,1].
double onedim_test(double x);

/// Standard four-term Hartmann function on [0,1]^6. Global minimum is
/// about -3.32237.
double hartman6(std::span<const double> x);

/// Checksum of the embedded Hartmann-6 coefficient tables.
double hartman6_coefficient_checksum();

/// Low-rank time-series toy on [0,1]^q:
/// y_t = x1 sin(2 pi t/L) + (1 - x1) cos(2 pi x2 t/L) + sum_{k>=3} x_k sin(2 pi k t/L),
/// t = 1..L. With q = 1 the second input is taken as 0.
std::vector<double> dynamic_toy(std::span<const double> x, int length);

/// Scalar simulators by CLI name: onedim, hartman6.
Simulator scalar_simulator(std::string_view name);

}  // namespace gpemu
