#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"
#include "gpemu/csv.hpp"
#include "gpemu/design.hpp"
#include "gpemu/error.hpp"
#include "gpemu/format.hpp"
#include "gpemu/gpmodel.hpp"
#include "gpemu/linalg.hpp"
#include "gpemu/localgp.hpp"
#include "gpemu/model_io.hpp"
#include "gpemu/rng.hpp"
#include "gpemu/seqdesign.hpp"
#include "gpemu/simulators.hpp"
#include "gpemu/svdgp.hpp"
#include "json.hpp"

namespace gpemu::cli {

namespace {

using nlohmann::json;

struct Common {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string kernel = "powexp";
  double power = 1.95;
  double nu = 2.5;
  std::string tau;
  double kappa_max = linalg::kDefaultKappaMax;
  int M = 1;
  std::string budget;  // empty: the command's own default
  std::string out;
  std::string meta;
};

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json vector_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "empty list '" + text + "'");
  return out;
}

std::vector<double> broadcast(std::vector<double> v, int d, const char* what) {
  if (v.size() == 1) v.assign(static_cast<std::size_t>(d), v[0]);
  if (static_cast<int>(v.size()) != d) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " needs 1 or " + std::to_string(d) + " values");
  }
  return v;
}

CorrelationSpec make_kernel(const Common& c, int d) {
  switch (parse_kernel_family(c.kernel)) {
    case KernelFamily::PowerExponential:
      return CorrelationSpec::power_exponential(std::vector<double>(static_cast<std::size_t>(d), 0.0),
                                                std::vector<double>(static_cast<std::size_t>(d), c.power));
    case KernelFamily::Matern:
      return CorrelationSpec::matern(std::vector<double>(static_cast<std::size_t>(d), 0.0), c.nu);
    case KernelFamily::CompactSupport:
      if (c.tau.empty()) throw Error(ErrorKind::InvalidArgument, "--kernel compact needs --tau");
      return CorrelationSpec::compact(broadcast(parse_list(c.tau), d, "--tau"));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown kernel");
}

FitOptions fit_options(const Common& c, const char* default_budget = "default") {
  const std::string budget = c.budget.empty() ? default_budget : c.budget;
  FitOptions o;
  if (budget == "local") {
    o = FitOptions::local_budget();
  } else if (budget != "default") {
    throw Error(ErrorKind::InvalidArgument, "--budget must be default or local");
  }
  o.kappa_max = c.kappa_max;
  o.regularization_iterations = c.M;
  o.seed = c.seed;
  o.workers = c.workers;
  o.validate();
  return o;
}

std::vector<Bounds> parse_bounds(const std::string& text, int d) {
  if (text.empty()) return std::vector<Bounds>(static_cast<std::size_t>(d), Bounds{});
  std::vector<Bounds> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "bounds entries look like lo:hi");
    out.push_back({parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
  }
  if (out.size() == 1) out.assign(static_cast<std::size_t>(d), out[0]);
  if (static_cast<int>(out.size()) != d) throw Error(ErrorKind::DimensionMismatch, "--bounds needs 1 or d entries");
  return out;
}

// Input columns of a table: every column except `skip`.
PointMatrix input_columns(const CsvTable& t, const std::string& skip = "") {
  std::vector<Eigen::Index> cols;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] != skip) cols.push_back(static_cast<Eigen::Index>(j));
  }
  if (cols.empty()) throw Error(ErrorKind::InvalidArgument, "table has no input columns");
  PointMatrix x(t.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = t.values.col(cols[k]);
  return x;
}

struct Training {
  PointMatrix raw;
  Vector y;
};

Training read_training(const std::string& path) {
  const CsvTable t = read_csv(path);
  const Eigen::Index yc = t.column_index("y");
  if (yc < 0) throw Error(ErrorKind::InvalidArgument, path + " has no 'y' column");
  return {input_columns(t, "y"), t.values.col(yc)};
}

std::string output_path(const Common& c, const std::string& explicit_path, const std::string& suffix) {
  if (!explicit_path.empty()) return explicit_path;
  return c.out + suffix;
}

// Flattens CLI11's "key=value" configuration dump into a JSON object.
json config_json(const std::string& config) {
  json j = json::object();
  std::stringstream ss(config);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string value = line.substr(eq + 1);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    j[line.substr(0, eq)] = value;
  }
  return j;
}

void write_meta(const Common& c, const std::string& command, const std::string& config, double wall) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["seed"] = c.seed;
  m["config"] = config_json(config);
  m["wall_time_s"] = wall;
  write_text(output_path(c, c.meta, ".meta.json"), m.dump(1) + "\n");
}

void add_common(CLI::App* sub, Common& c, bool kernel_flags) {
  sub->add_option("--seed", c.seed, "Run seed")->capture_default_str();
  sub->add_option("--workers", c.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  if (kernel_flags) {
    sub->add_option("--kernel", c.kernel, "powexp, matern or compact")->capture_default_str();
    sub->add_option("--power", c.power, "Power-exponential exponent p in [1,2]")->capture_default_str();
    sub->add_option("--nu", c.nu, "Matern smoothness: 0.5, 1.5 or 2.5")->capture_default_str();
    sub->add_option("--tau", c.tau, "Compact-support radii, comma separated");
    sub->add_option("--kappa-max", c.kappa_max, "Condition-number ceiling")->capture_default_str();
    sub->add_option("--M", c.M, "Regularization iterations of the predictor")->capture_default_str();
    sub->add_option("--budget", c.budget, "Multistart budget: default or local");
  }
  sub->add_option("--out", c.out, "Output path")->required();
  sub->add_option("--meta", c.meta, "Metadata path (default <out>.meta.json)");
}

// ---- commands ----

struct FitArgs {
  std::string data;
  std::string mean_mode = "ordinary";
  bool noisy = false;
  std::string bounds;
  std::string report;
};

void cmd_fit(const Common& c, const FitArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Training tr = read_training(a.data);
  const int d = static_cast<int>(tr.raw.cols());
  const std::vector<Bounds> bounds = parse_bounds(a.bounds, d);
  const Design x = scale_to_unit(tr.raw, bounds);
  const CorrelationSpec spec = make_kernel(c, d);
  const FitOptions opts = fit_options(c);
  const MeanMode mode = parse_mean_mode(a.mean_mode);
  const MeanBasis basis = MeanBasis::linear(d);
  GpModel model = fit_model(x, tr.y, spec, opts, mode, a.noisy, mode == MeanMode::Universal ? &basis : nullptr);
  model.input_bounds = bounds;
  save_model(model, c.out);
  const double kappa = model_condition_number(model);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json r;
  r["beta"] = vector_json(model.spec.beta);
  Vector theta(d);
  for (int k = 0; k < d; ++k) theta(k) = model.spec.has_beta() ? model.spec.theta(k) : 0.0;
  r["theta"] = vector_json(theta);
  r["mean_mode"] = std::string(to_string(model.mean_mode));
  r["mu_hat"] = number(model.mu_hat);
  if (mode == MeanMode::Universal) r["gamma_hat"] = vector_json(model.gamma_hat);
  r["sigma2_hat"] = number(model.sigma2_hat);
  r["delta"] = number(model.delta);
  r["sigma2_eps"] = number(model.sigma2_eps());
  r["deviance"] = number(model.deviance);
  r["kappa"] = number(kappa);
  r["kappa_max"] = number(model.kappa_max);
  r["degenerate"] = model.degenerate;
  r["noisy"] = model.noisy;
  r["n"] = model.n();
  r["d"] = model.d();
  r["wall_time_s"] = wall;
  write_text(output_path(c, a.report, ".report.json"), r.dump(1) + "\n");
  out << "fit: n=" << model.n() << " d=" << d << " deviance=" << format_double(model.deviance)
      << " delta=" << format_double(model.delta) << " kappa=" << format_double(kappa)
      << (model.degenerate ? " (degenerate response)" : "") << "\n";
}

struct PredictArgs {
  std::string model;
  std::string query;
  bool plot_data = false;
  std::string truth;
  int grid = 1000;
};

void cmd_predict(const Common& c, const PredictArgs& a, std::ostream& out) {
  const GpModel model = load_model(a.model);
  CsvTable result;
  if (a.plot_data) {
    if (model.d() != 1) throw Error(ErrorKind::DimensionMismatch, "--plot-data needs a 1-d model");
    if (a.truth.empty()) throw Error(ErrorKind::InvalidArgument, "--plot-data needs --truth <simulator>");
    if (a.grid < 2) throw Error(ErrorKind::InvalidSize, "--grid must be at least 2");
    const Simulator sim = scalar_simulator(a.truth);
    if (sim.dim != 1) throw Error(ErrorKind::DimensionMismatch, "--truth simulator must be 1-d");
    const Bounds b = model.input_bounds.empty() ? Bounds{} : model.input_bounds[0];
    result.header = {"x", "truth", "mean", "lower", "upper"};
    result.values.resize(a.grid, 5);
    for (int g = 0; g < a.grid; ++g) {
      const double u = static_cast<double>(g) / static_cast<double>(a.grid - 1);
      const double xr = b.lo + u * (b.hi - b.lo);
      const PredictionResult p = predict(model, {&u, 1}, c.M);
      const double s = std::sqrt(p.variance);
      result.values.row(g) << xr, sim.evaluate({&xr, 1}), p.mean, p.mean - 2.0 * s, p.mean + 2.0 * s;
    }
  } else {
    if (a.query.empty()) throw Error(ErrorKind::InvalidArgument, "predict needs --query or --plot-data");
    const CsvTable q = read_csv(a.query);
    const PointMatrix raw = input_columns(q, "y");
    if (raw.cols() != model.d()) throw Error(ErrorKind::DimensionMismatch, "query columns do not match the model");
    std::vector<Bounds> bounds = model.input_bounds;
    if (bounds.empty()) bounds.assign(static_cast<std::size_t>(model.d()), Bounds{});
    const Design x = scale_to_unit(raw, bounds);
    const std::vector<PredictionResult> pred = predict_batch(model, x.points(), c.M, c.workers);
    result.header = {"mean", "variance", "lower95", "upper95"};
    result.values.resize(static_cast<Eigen::Index>(pred.size()), 4);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double s = std::sqrt(pred[i].variance);
      result.values.row(static_cast<Eigen::Index>(i)) << pred[i].mean, pred[i].variance, pred[i].mean - 2.0 * s,
          pred[i].mean + 2.0 * s;
    }
  }
  write_text(c.out, to_csv(result));
  out << "predict: " << result.values.rows() << " rows written to " << c.out << "\n";
}

struct DiagnoseArgs {
  std::string data;
  int n = 0;
  int d = 0;
  std::string beta = "0";
  int trials = 20;
  std::string benchmark_out;
};

void cmd_diagnose(const Common& c, const DiagnoseArgs& a, std::ostream& out) {
  Design x;
  if (!a.data.empty()) {
    const CsvTable t = read_csv(a.data);
    x = Design(input_columns(t, "y"));
  } else {
    if (a.n < 2 || a.d < 1) throw Error(ErrorKind::InvalidArgument, "diagnose needs --data or --n >= 2 and --d >= 1");
    x = lhd(a.n, a.d, c.seed);
  }
  const int d = static_cast<int>(x.d());
  CorrelationSpec spec = make_kernel(c, d);
  if (spec.has_beta()) spec.beta = broadcast(parse_list(a.beta), d, "--beta");
  spec.validate();
  const Matrix r = corr_matrix(spec, x);
  const Vector eig = linalg::eigenvalues(r);
  const double kappa = linalg::condition_number(r);
  const double delta = linalg::nugget_lower_bound(eig, c.kappa_max);

  json j;
  j["n"] = x.n();
  j["d"] = d;
  j["beta"] = vector_json(spec.beta);
  j["kappa"] = number(kappa);
  j["lambda_max"] = number(eig(0));
  j["lambda_min"] = number(eig(eig.size() - 1));
  j["kappa_max"] = number(c.kappa_max);
  j["delta_lb"] = number(delta);
  j["kappa_with_delta_lb"] = number((eig(0) + delta) / (eig(eig.size() - 1) + delta));
  write_text(c.out, j.dump(1) + "\n");

  const int bn = static_cast<int>(std::max<Eigen::Index>(2, x.n()));
  const linalg::BenchmarkReport rep = linalg::decomposition_benchmark(bn, d, a.trials, c.seed);
  write_text(output_path(c, a.benchmark_out, ".benchmark.csv"), rep.to_csv());
  out << "diagnose: kappa=" << format_double(kappa) << " delta_lb=" << format_double(delta) << "\n";
}

struct BenchmarkArgs {
  int n = 50;
  int d = 2;
  int trials = 200;
};

void cmd_benchmark(const Common& c, const BenchmarkArgs& a, std::ostream& out) {
  if (a.n < 2 || a.d < 1 || a.trials < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 2, d >= 1, trials >= 1");
  const linalg::BenchmarkReport rep = linalg::decomposition_benchmark(a.n, a.d, a.trials, c.seed);
  write_text(c.out, rep.to_csv());
  for (const auto& row : rep.rows) {
    out << row.method << ": mean " << format_double(row.mean_recon_err) << " max "
        << format_double(row.max_recon_err) << " failures " << row.failures << "\n";
  }
}

struct LhdArgs {
  int n = 0;
  int d = 0;
  int maximin = 0;
};

void cmd_lhd(const Common& c, const LhdArgs& a, std::ostream& out) {
  Design x = lhd(a.n, a.d, c.seed);
  if (a.maximin > 0) x = maximin_improve(x, a.maximin, derive_seed(c.seed, 1));
  CsvTable t{numbered_header("x", a.d), x.points()};
  write_text(c.out, to_csv(t));
  out << "lhd: " << a.n << " x " << a.d << " written to " << c.out << "\n";
}

struct SimulateArgs {
  std::string sim;
  std::string input;
  int length = 100;
};

void cmd_simulate(const Common& c, const SimulateArgs& a, std::ostream& out) {
  const CsvTable t = read_csv(a.input);
  const PointMatrix raw = input_columns(t, "y");
  if (a.sim == "dynamic") {
    CsvTable r;
    r.header = numbered_header("run", raw.rows());
    r.values.resize(a.length, raw.rows());
    for (Eigen::Index j = 0; j < raw.rows(); ++j) {
      const std::vector<double> series =
          dynamic_toy({raw.row(j).data(), static_cast<std::size_t>(raw.cols())}, a.length);
      for (int s = 0; s < a.length; ++s) r.values(s, j) = series[static_cast<std::size_t>(s)];
    }
    write_text(c.out, to_csv(r));
  } else {
    const Simulator sim = scalar_simulator(a.sim);
    if (raw.cols() != sim.dim) throw Error(ErrorKind::DimensionMismatch, "input has the wrong number of columns");
    CsvTable r;
    r.header = numbered_header("x", sim.dim);
    r.header.push_back("y");
    r.values.resize(raw.rows(), sim.dim + 1);
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      r.values.row(i).head(sim.dim) = raw.row(i);
      r.values(i, sim.dim) = sim.evaluate({raw.row(i).data(), static_cast<std::size_t>(raw.cols())});
    }
    write_text(c.out, to_csv(r));
  }
  out << "simulate: " << raw.rows() << " runs of " << a.sim << " written to " << c.out << "\n";
}

struct SvdFitArgs {
  std::string design;
  std::string response;
  double frac = 0.95;
  bool center = false;
  std::string report;
};

void cmd_svdgp_fit(const Common& c, const SvdFitArgs& a, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Design x(input_columns(read_csv(a.design), "y"));
  const CsvTable resp = read_csv(a.response);
  SvdGpOptions opts;
  opts.frac = a.frac;
  opts.center = a.center;
  opts.kernel = make_kernel(c, static_cast<int>(x.d()));
  opts.fit = fit_options(c);
  const SvdGpModel model = fit_svdgp(x, resp.values, opts);
  save_svdgp(model, c.out);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json r;
  r["p"] = model.p;
  r["L"] = model.length();
  r["N"] = model.X.n();
  r["singular_values"] = vector_json(model.singular_values);
  r["residual_var"] = number(model.residual_var);
  r["wall_time_s"] = wall;
  write_text(output_path(c, a.report, ".report.json"), r.dump(1) + "\n");
  out << "svdgp-fit: p=" << model.p << " residual_var=" << format_double(model.residual_var) << "\n";
}

struct SvdPredictArgs {
  std::string model;
  std::string query;
};

void cmd_svdgp_predict(const Common& c, const SvdPredictArgs& a, std::ostream& out) {
  const SvdGpModel model = load_svdgp(a.model);
  const Design q(input_columns(read_csv(a.query), "y"));
  CsvTable r;
  r.header = {"query", "t", "mean", "variance"};
  r.values.resize(q.n() * model.length(), 4);
  for (Eigen::Index i = 0; i < q.n(); ++i) {
    const SeriesPrediction p = predict_svdgp(model, q.point(i), c.M);
    for (Eigen::Index t = 0; t < model.length(); ++t) {
      r.values.row(i * model.length() + t) << static_cast<double>(i + 1), static_cast<double>(t + 1), p.mean(t),
          p.variance(t);
    }
  }
  write_text(c.out, to_csv(r));
  out << "svdgp-predict: " << q.n() << " series written to " << c.out << "\n";
}

struct LocalArgs {
  std::string data;
  std::string query;
  Eigen::Index n = 0;
};

bool cmd_localgp(const Common& c, const LocalArgs& a, std::ostream& out, std::ostream& err) {
  const Training tr = read_training(a.data);
  const BigDataset data(Design(tr.raw), tr.y);
  const Design q(input_columns(read_csv(a.query), "y"));
  if (a.n < 1 || a.n > data.size()) {
    throw Error(ErrorKind::NTooLarge, "neighborhood size " + std::to_string(a.n) + " outside [1, " +
                                          std::to_string(data.size()) + "]");
  }
  const CorrelationSpec spec = make_kernel(c, static_cast<int>(q.d()));
  const FitOptions opts = fit_options(c, "local");
  const std::vector<LocalPrediction> pred = predict_local_batch(data, q.points(), a.n, spec, opts, c.workers);
  CsvTable r;
  r.header = {"mean", "variance"};
  r.values.resize(static_cast<Eigen::Index>(pred.size()), 2);
  bool all_ok = true;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (pred[i].ok) {
      r.values.row(row) << pred[i].result.mean, pred[i].result.variance;
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.values.row(row) << nan, nan;
      err << "query " << i + 1 << ": " << pred[i].error << "\n";
      all_ok = false;
    }
  }
  write_text(c.out, to_csv(r));
  out << "localgp: " << pred.size() << " predictions written to " << c.out << "\n";
  return all_ok;
}

struct EiArgs {
  std::string sim;
  int n0 = 0;
  int n_total = 0;
  int candidates = 500;
  std::string summary;
};

bool cmd_ei(const Common& c, const EiArgs& a, std::ostream& out) {
  const Simulator sim = scalar_simulator(a.sim);
  EiOptions opts;
  opts.fit = fit_options(c);
  opts.kernel = make_kernel(c, sim.dim);
  opts.candidate_count = a.candidates;
  opts.seed = c.seed;
  opts.workers = c.workers;
  const EiState state = ei_optimize(sim, a.n0, a.n_total, opts);

  CsvTable trace;
  trace.header = {"step"};
  for (const auto& h : numbered_header("x", sim.dim)) trace.header.push_back(h);
  for (const char* h : {"ei", "y", "fmin"}) trace.header.push_back(h);
  trace.values.resize(static_cast<Eigen::Index>(state.trace.size()), sim.dim + 4);
  for (std::size_t s = 0; s < state.trace.size(); ++s) {
    const auto& e = state.trace[s];
    const auto row = static_cast<Eigen::Index>(s);
    trace.values(row, 0) = static_cast<double>(s + 1);
    for (int k = 0; k < sim.dim; ++k) trace.values(row, k + 1) = e.point[static_cast<std::size_t>(k)];
    trace.values(row, sim.dim + 1) = e.ei;
    trace.values(row, sim.dim + 2) = e.y;
    trace.values(row, sim.dim + 3) = e.fmin;
  }
  write_text(c.out, to_csv(trace));

  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < state.y.size(); ++i) {
    if (state.y(i) < state.y(best)) best = i;
  }
  json j;
  j["simulator"] = a.sim;
  j["status"] = std::string(to_string(state.status));
  j["message"] = state.message;
  j["n0"] = state.n0;
  j["n_total"] = state.n_total;
  j["evaluations"] = state.evaluations();
  j["fmin"] = number(state.fmin);
  if (state.y.size() > 0) {
    j["x_best"] = vector_json(std::span<const double>(state.x.row(best).data(), static_cast<std::size_t>(sim.dim)));
  }
  write_text(output_path(c, a.summary, ".summary.json"), j.dump(1) + "\n");
  out << "ei: status=" << to_string(state.status) << " evaluations=" << state.evaluations()
      << " fmin=" << format_double(state.fmin) << "\n";
  return state.status != EiStatus::SimulatorFailure;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::AllSingularValuesTruncated:
    case ErrorKind::RankDeficientBasis:
    case ErrorKind::NumericalIntegrity:
    case ErrorKind::AllZeroSpectrum:
    case ErrorKind::EmptyCandidates:
    case ErrorKind::SimulatorFailure:
      return kExitCompute;
    default:
      return kExitInput;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian-process surrogate toolkit", "gpemu"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common c;
  FitArgs fit_a;
  PredictArgs pred_a;
  DiagnoseArgs diag_a;
  BenchmarkArgs bench_a;
  LhdArgs lhd_a;
  SimulateArgs sim_a;
  SvdFitArgs svdf_a;
  SvdPredictArgs svdp_a;
  LocalArgs local_a;
  EiArgs ei_a;

  auto* fit = app.add_subcommand("fit", "Fit a scalar GP model to training data (columns x1..xd,y)");
  add_common(fit, c, true);
  fit->add_option("--data", fit_a.data, "Training CSV")->required();
  fit->add_option("--mean-mode", fit_a.mean_mode, "simple, ordinary or universal (linear basis)")
      ->capture_default_str();
  fit->add_flag("--noisy", fit_a.noisy, "Estimate a noise nugget");
  fit->add_option("--bounds", fit_a.bounds, "Raw input bounds lo:hi per coordinate (default 0:1)");
  fit->add_option("--report", fit_a.report, "Fit report path (default <out>.report.json)");

  auto* pred = app.add_subcommand("predict", "Predict with a saved model");
  add_common(pred, c, true);
  pred->add_option("--model", pred_a.model, "Model file")->required();
  pred->add_option("--query", pred_a.query, "Query CSV");
  pred->add_flag("--plot-data", pred_a.plot_data, "Emit x,truth,mean,lower,upper on a grid (1-d models)");
  pred->add_option("--truth", pred_a.truth, "Simulator giving the truth column");
  pred->add_option("--grid", pred_a.grid, "Grid size for --plot-data")->capture_default_str();

  auto* diag = app.add_subcommand("diagnose", "Conditioning diagnostics and decomposition benchmark");
  add_common(diag, c, true);
  diag->add_option("--data", diag_a.data, "CSV with input columns");
  diag->add_option("--n", diag_a.n, "Synthetic LHD size");
  diag->add_option("--d", diag_a.d, "Synthetic LHD dimension");
  diag->add_option("--beta", diag_a.beta, "log10 theta, one value or d values")->capture_default_str();
  diag->add_option("--trials", diag_a.trials, "Benchmark trials")->capture_default_str();
  diag->add_option("--benchmark-out", diag_a.benchmark_out, "Benchmark CSV (default <out>.benchmark.csv)");

  auto* bench = app.add_subcommand("benchmark", "Decomposition accuracy benchmark");
  add_common(bench, c, false);
  bench->add_option("--n", bench_a.n, "Matrix order")->capture_default_str();
  bench->add_option("--d", bench_a.d, "Input dimension")->capture_default_str();
  bench->add_option("--trials", bench_a.trials, "Random matrices")->capture_default_str();

  auto* lhd_cmd = app.add_subcommand("lhd", "Latin hypercube design on [0,1]^d");
  add_common(lhd_cmd, c, false);
  lhd_cmd->add_option("--n", lhd_a.n, "Points")->required();
  lhd_cmd->add_option("--d", lhd_a.d, "Dimension")->required();
  lhd_cmd->add_option("--maximin", lhd_a.maximin, "Maximin improvement passes")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Run a test simulator on a design");
  add_common(simulate, c, false);
  simulate->add_option("--sim", sim_a.sim, "onedim, hartman6 or dynamic")->required();
  simulate->add_option("--input", sim_a.input, "Design CSV")->required();
  simulate->add_option("--length", sim_a.length, "Series length for dynamic")->capture_default_str();

  auto* svdf = app.add_subcommand("svdgp-fit", "Fit an SVD-based GP to time-series responses");
  add_common(svdf, c, true);
  svdf->add_option("--design", svdf_a.design, "Design CSV (N rows)")->required();
  svdf->add_option("--response", svdf_a.response, "Response CSV (L rows x N columns)")->required();
  svdf->add_option("--frac", svdf_a.frac, "Retained energy fraction")->capture_default_str();
  svdf->add_flag("--center", svdf_a.center, "Subtract the mean series first");
  svdf->add_option("--report", svdf_a.report, "Fit report path (default <out>.report.json)");

  auto* svdp = app.add_subcommand("svdgp-predict", "Predict series with a saved SVD-GP model");
  add_common(svdp, c, true);
  svdp->add_option("--model", svdp_a.model, "Model file")->required();
  svdp->add_option("--query", svdp_a.query, "Query CSV")->required();

  auto* local = app.add_subcommand("localgp", "Nearest-neighbor local GP predictions");
  add_common(local, c, true);
  local->get_option("--budget")->description("Multistart budget: default or local (the default here)");
  local->add_option("--data", local_a.data, "Training CSV")->required();
  local->add_option("--query", local_a.query, "Query CSV")->required();
  local->add_option("--n", local_a.n, "Neighborhood size")->required();

  auto* ei = app.add_subcommand("ei", "Expected-improvement sequential minimization");
  add_common(ei, c, true);
  ei->add_option("--sim", ei_a.sim, "onedim or hartman6")->required();
  ei->add_option("--n0", ei_a.n0, "Initial design size")->required();
  ei->add_option("--n-total", ei_a.n_total, "Total evaluations")->required();
  ei->add_option("--candidates", ei_a.candidates, "Candidates per step")->capture_default_str();
  ei->add_option("--summary", ei_a.summary, "Summary path (default <out>.summary.json)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  const std::string config = cmd->config_to_str(true, false);
  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    if (cmd == fit) cmd_fit(c, fit_a, out);
    else if (cmd == pred) cmd_predict(c, pred_a, out);
    else if (cmd == diag) cmd_diagnose(c, diag_a, out);
    else if (cmd == bench) cmd_benchmark(c, bench_a, out);
    else if (cmd == lhd_cmd) cmd_lhd(c, lhd_a, out);
    else if (cmd == simulate) cmd_simulate(c, sim_a, out);
    else if (cmd == svdf) cmd_svdgp_fit(c, svdf_a, out);
    else if (cmd == svdp) cmd_svdgp_predict(c, svdp_a, out);
    else if (cmd == local) code = cmd_localgp(c, local_a, out, err) ? kExitOk : kExitCompute;
    else if (cmd == ei) code = cmd_ei(c, ei_a, out) ? kExitOk : kExitCompute;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_meta(c, name, config, wall);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return code;
}

}  // namespace gpemu::cli
