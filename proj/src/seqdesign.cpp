#include "gpemu/seqdesign.hpp"

#include <cmath>
#include <numbers>

#include "gpemu/design.hpp"
#include "gpemu/error.hpp"
#include "gpemu/parallel.hpp"
#include "gpemu/rng.hpp"

namespace gpemu {

double expected_improvement(double mean, double sd, double fmin) {
  const double gain = fmin - mean;
  if (!(sd > 0.0)) return std::max(gain, 0.0);
  const double u = gain / sd;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(gain * cdf + sd * pdf, 0.0);
}

std::string_view to_string(EiStatus status) {
  switch (status) {
    case EiStatus::Running: return "running";
    case EiStatus::Completed: return "completed";
    case EiStatus::Stalled: return "stalled";
    case EiStatus::SimulatorFailure: return "simulator_failure";
  }
  return "unknown";
}

EiChoice ei_step(const EiState& state, const GpModel& model, const Design& candidates, int workers) {
  if (candidates.n() == 0) throw Error(ErrorKind::EmptyCandidates, "no candidates");
  if (candidates.d() != model.d()) throw Error(ErrorKind::DimensionMismatch, "candidate dimension mismatch");
  const std::vector<PredictionResult> pred = predict_batch(model, candidates.points(), 1, workers);
  std::vector<double> ei(pred.size());
  parallel_for(ei.size(), workers, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < state.x.rows(); ++j) {
      if (state.x.row(j) == candidates.points().row(row)) {
        ei[i] = 0.0;
        return;
      }
    }
    ei[i] = expected_improvement(pred[i].mean, std::sqrt(pred[i].variance), state.fmin);
  });
  EiChoice best;
  best.ei = ei[0];
  for (std::size_t i = 1; i < ei.size(); ++i) {
    if (ei[i] > best.ei) {
      best.ei = ei[i];
      best.index = static_cast<Eigen::Index>(i);
    }
  }
  best.stalled = !(best.ei > 0.0);
  return best;
}

namespace {

// Evaluates the simulator, converting failures into a status on the state.
bool evaluate(const Simulator& sim, std::span<const double> x, EiState& state, double& y) {
  try {
    y = sim.evaluate(x);
  } catch (const std::exception& e) {
    state.status = EiStatus::SimulatorFailure;
    state.message = e.what();
    return false;
  }
  if (!std::isfinite(y)) {
    state.status = EiStatus::SimulatorFailure;
    state.message = "simulator returned a non-finite value";
    return false;
  }
  return true;
}

void append(EiState& state, std::span<const double> x, double y) {
  const Eigen::Index n = state.x.rows();
  state.x.conservativeResize(n + 1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) state.x(n, static_cast<Eigen::Index>(k)) = x[k];
  state.y.conservativeResize(n + 1);
  state.y(n) = y;
  state.fmin = n == 0 ? y : std::min(state.fmin, y);
}

}  // namespace

EiState ei_optimize(const Simulator& sim, int n0, int n_total, const EiOptions& opts) {
  if (n0 < 2 || n_total < n0) throw Error(ErrorKind::InvalidArgument, "need 2 <= n0 <= n_total");
  if (opts.candidate_count < 1) throw Error(ErrorKind::EmptyCandidates, "candidate_count must be positive");
  EiState state;
  state.n0 = n0;
  state.n_total = n_total;
  state.x.resize(0, sim.dim);

  const Design initial = lhd(n0, sim.dim, derive_seed(opts.seed, 0));
  for (Eigen::Index i = 0; i < initial.n(); ++i) {
    double y = 0.0;
    if (!evaluate(sim, initial.point(i), state, y)) return state;
    append(state, initial.point(i), y);
  }

  const CorrelationSpec kernel = opts.kernel ? *opts.kernel : default_kernel(sim.dim);
  const std::uint64_t candidate_stream = derive_seed(opts.seed, 1);
  const std::uint64_t fit_stream = derive_seed(opts.seed, 2);
  for (int step = 0; state.evaluations() < n_total; ++step) {
    FitOptions fo = opts.fit;
    fo.seed = derive_seed(fit_stream, static_cast<std::uint64_t>(step));
    fo.workers = opts.workers;
    const GpModel model = fit(Design(state.x), state.y, kernel, fo);
    const Design candidates =
        lhd(opts.candidate_count, sim.dim, derive_seed(candidate_stream, static_cast<std::uint64_t>(step)));
    const EiChoice choice = ei_step(state, model, candidates, opts.workers);
    if (choice.stalled) {
      state.status = EiStatus::Stalled;
      state.message = "expected improvement is zero at every candidate";
      return state;
    }
    const auto x = candidates.point(choice.index);
    double y = 0.0;
    if (!evaluate(sim, x, state, y)) return state;
    append(state, x, y);
    state.trace.push_back({std::vector<double>(x.begin(), x.end()), choice.ei, y, state.fmin});
  }
  state.status = EiStatus::Completed;
  return state;
}

}  // namespace gpemu
