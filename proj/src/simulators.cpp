#include "gpemu/simulators.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "gpemu/error.hpp"

namespace gpemu {

namespace {

constexpr std::array<double, 4> kAlpha = {1.0, 1.2, 3.0, 3.2};

constexpr std::array<std::array<double, 6>, 4> kA = {{
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
}};

constexpr std::array<std::array<double, 6>, 4> kP = {{
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
}};

constexpr double checksum() {
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    s += kAlpha[i] * static_cast<double>(i + 1);
    for (std::size_t j = 0; j < 6; ++j) {
      s += kA[i][j] * static_cast<double>(j + 1) + kP[i][j] * static_cast<double>(7 * i + j + 1);
    }
  }
  return s;
}

constexpr double kChecksum = 850.4553;
static_assert(checksum() - kChecksum < 1e-9 && kChecksum - checksum() < 1e-9,
              "Hartmann-6 coefficient tables corrupted");

void require_unit(std::span<const double> x, const char* who) {
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::DomainError, std::string(who) + ": input outside [0,1]");
  }
}

}  // namespace

double onedim_test(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::DomainError, "onedim_test: x outside [0,1]");
  return std::log(x + 0.1) + std::sin(5.0 * std::numbers::pi * x);
}

double hartman6(std::span<const double> x) {
  if (x.size() != 6) throw Error(ErrorKind::DimensionMismatch, "hartman6 takes 6 inputs");
  require_unit(x, "hartman6");
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      const double diff = x[j] - kP[i][j];
      inner += kA[i][j] * diff * diff;
    }
    total += kAlpha[i] * std::exp(-inner);
  }
  return -total;
}

double hartman6_coefficient_checksum() { return checksum(); }

std::vector<double> dynamic_toy(std::span<const double> x, int length) {
  if (length < 2) throw Error(ErrorKind::InvalidLength, "dynamic_toy needs L >= 2");
  if (x.empty()) throw Error(ErrorKind::DimensionMismatch, "dynamic_toy needs q >= 1");
  require_unit(x, "dynamic_toy");
  const double two_pi = 2.0 * std::numbers::pi;
  const double x1 = x[0];
  const double x2 = x.size() > 1 ? x[1] : 0.0;
  std::vector<double> y(static_cast<std::size_t>(length));
  for (int t = 1; t <= length; ++t) {
    const double s = static_cast<double>(t) / length;
    double v = x1 * std::sin(two_pi * s) + (1.0 - x1) * std::cos(two_pi * x2 * s);
    for (std::size_t k = 2; k < x.size(); ++k) {
      v += x[k] * std::sin(two_pi * static_cast<double>(k + 1) * s);
    }
    y[static_cast<std::size_t>(t - 1)] = v;
  }
  return y;
}

Simulator scalar_simulator(std::string_view name) {
  if (name == "onedim") {
    return {"onedim", 1, true, [](std::span<const double> x) {
              if (x.size() != 1) throw Error(ErrorKind::DimensionMismatch, "onedim takes 1 input");
              return onedim_test(x[0]);
            }};
  }
  if (name == "hartman6") return {"hartman6", 6, true, [](std::span<const double> x) { return hartman6(x); }};
  throw Error(ErrorKind::InvalidArgument, "unknown simulator '" + std::string(name) + "'");
}

}  // namespace gpemu
