#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpemu/gpmodel.hpp"
#include "gpemu/simulators.hpp"

namespace gpemu {

/// E[max(fmin - Y, 0)] for Y ~ N(mean, sd^2); max(fmin - mean, 0) when sd = 0.
double expected_improvement(double mean, double sd, double fmin);

struct EiTraceEntry {
  std::vector<double> point;
  double ei = 0.0;
  double y = 0.0;
  double fmin = 0.0;
};

enum class EiStatus { Running, Completed, Stalled, SimulatorFailure };

std::string_view to_string(EiStatus status);

struct EiState {
  PointMatrix x;  // evaluated points, one per row
  Vector y;
  double fmin = 0.0;
  std::vector<EiTraceEntry> trace;
  int n0 = 0;
  int n_total = 0;
  EiStatus status = EiStatus::Running;
  std::string message;

  Eigen::Index evaluations() const { return x.rows(); }
};

struct EiChoice {
  Eigen::Index index = 0;
  double ei = 0.0;
  /// Every candidate has zero EI.
  bool stalled = false;
};

/// Candidate with the largest EI, ties to the lowest index. Candidates that
/// coincide with an evaluated point score 0. Throws EmptyCandidates.
EiChoice ei_step(const EiState& state, const GpModel& model, const Design& candidates, int workers = 1);

struct EiOptions {
  FitOptions fit;
  /// Surrogate kernel; defaults to default_kernel(dim).
  std::optional<CorrelationSpec> kernel;
  int candidate_count = 500;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// n0-point LHD, then one EI-chosen point per step until n_total evaluations
/// or a stall. A simulator exception or non-finite output ends the run with
/// status SimulatorFailure and the state gathered so far.
EiState ei_optimize(const Simulator& sim, int n0, int n_total, const EiOptions& opts);

}  // namespace gpemu
