#include "gpemu/model_io.hpp"

#include <cmath>
#include <limits>

#include "gpemu/csv.hpp"
#include "gpemu/error.hpp"
#include "json.hpp"

namespace gpemu {

namespace {

using nlohmann::json;

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorKind::CorruptFile, "expected a number, got " + j.dump());
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json vector_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Vector vector_from(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_double(j.at(i));
  return v;
}

std::vector<double> std_vector_from(const json& j) {
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(to_double(e));
  return v;
}

template <typename M>
json matrix_json(const M& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename M>
M matrix_from(const json& j, Eigen::Index cols_if_empty = 0) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : cols_if_empty;
  M m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorKind::CorruptFile, "ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = to_double(row.at(static_cast<std::size_t>(k)));
  }
  return m;
}

json gp_json(const GpModel& m) {
  json j;
  j["kernel"] = {
      {"family", std::string(to_string(m.spec.family))},
      {"beta", vector_json(m.spec.beta)},
      {"power", vector_json(m.spec.power)},
      {"nu", number(m.spec.nu)},
      {"tau", vector_json(m.spec.tau)},
  };
  j["mean_mode"] = std::string(to_string(m.mean_mode));
  j["basis"] = m.basis.exponents;
  j["gamma_hat"] = vector_json(m.gamma_hat);
  j["mu_hat"] = number(m.mu_hat);
  j["sigma2_hat"] = number(m.sigma2_hat);
  j["delta"] = number(m.delta);
  j["kappa_max"] = number(m.kappa_max);
  j["deviance"] = number(m.deviance);
  j["degenerate"] = m.degenerate;
  j["noisy"] = m.noisy;
  json bounds = json::array();
  for (const auto& b : m.input_bounds) bounds.push_back({number(b.lo), number(b.hi)});
  j["input_bounds"] = bounds;
  j["X"] = matrix_json(m.X.points());
  j["Y"] = vector_json(m.Y);
  return j;
}

GpModel gp_from(const json& j) {
  GpModel m;
  const json& k = j.at("kernel");
  m.spec.family = parse_kernel_family(k.at("family").get<std::string>());
  m.spec.beta = std_vector_from(k.at("beta"));
  m.spec.power = std_vector_from(k.at("power"));
  m.spec.nu = to_double(k.at("nu"));
  m.spec.tau = std_vector_from(k.at("tau"));
  m.spec.validate();
  m.mean_mode = parse_mean_mode(j.at("mean_mode").get<std::string>());
  m.basis.exponents = j.at("basis").get<std::vector<std::vector<int>>>();
  m.gamma_hat = vector_from(j.at("gamma_hat"));
  m.mu_hat = to_double(j.at("mu_hat"));
  m.sigma2_hat = to_double(j.at("sigma2_hat"));
  m.delta = to_double(j.at("delta"));
  m.kappa_max = to_double(j.at("kappa_max"));
  m.deviance = to_double(j.at("deviance"));
  m.degenerate = j.at("degenerate").get<bool>();
  m.noisy = j.at("noisy").get<bool>();
  for (const auto& b : j.at("input_bounds")) m.input_bounds.push_back({to_double(b.at(0)), to_double(b.at(1))});
  m.X = Design(matrix_from<PointMatrix>(j.at("X")));
  m.Y = vector_from(j.at("Y"));
  if (m.Y.size() != m.X.n() || m.X.d() != m.spec.dim()) {
    throw Error(ErrorKind::CorruptFile, "model dimensions are inconsistent");
  }
  if (m.mean_mode == MeanMode::Universal && m.gamma_hat.size() != m.basis.size()) {
    throw Error(ErrorKind::CorruptFile, "gamma_hat does not match the basis");
  }
  finalize_model(m);
  return m;
}

json parse_document(const std::string& text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptFile, std::string("cannot parse model file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version")) {
    throw Error(ErrorKind::CorruptFile, "model file has no schema_version");
  }
  const json& v = j.at("schema_version");
  if (!v.is_number_integer()) throw Error(ErrorKind::CorruptFile, "schema_version is not an integer");
  if (v.get<int>() != kModelSchemaVersion) {
    throw Error(ErrorKind::SchemaVersionMismatch, "file has schema_version " + std::to_string(v.get<int>()) +
                                                      ", this build reads version " +
                                                      std::to_string(kModelSchemaVersion));
  }
  if (!j.contains("model") || j.at("model") != kind) {
    throw Error(ErrorKind::CorruptFile, std::string("model file does not hold a '") + kind + "' model");
  }
  return j;
}

// Maps every failure while rebuilding a model from a parsed document to
// CorruptFile, keeping the original message.
template <typename Fn>
auto rebuild(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptFile, std::string("incomplete model file: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptFile) throw;
    throw Error(ErrorKind::CorruptFile, std::string("invalid model file: ") + e.what());
  }
}

}  // namespace

std::string model_to_json(const GpModel& model) {
  json j = gp_json(model);
  j["schema_version"] = kModelSchemaVersion;
  j["model"] = "gp";
  return j.dump(1) + "\n";
}

GpModel model_from_json(const std::string& text) {
  const json j = parse_document(text, "gp");
  return rebuild([&] { return gp_from(j); });
}

void save_model(const GpModel& model, const std::filesystem::path& path) { write_text(path, model_to_json(model)); }

GpModel load_model(const std::filesystem::path& path) { return model_from_json(read_text(path)); }

std::string svdgp_to_json(const SvdGpModel& model) {
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["model"] = "svdgp";
  j["p"] = model.p;
  j["basis"] = matrix_json(model.basis);
  j["spectrum"] = vector_json(model.singular_values);
  j["residual_var"] = number(model.residual_var);
  j["centered"] = model.centered;
  j["center"] = vector_json(model.center);
  j["X"] = matrix_json(model.X.points());
  json coeffs = json::array();
  for (const auto& c : model.coefficients) coeffs.push_back(gp_json(c));
  j["coefficients"] = coeffs;
  return j.dump(1) + "\n";
}

SvdGpModel svdgp_from_json(const std::string& text) {
  const json j = parse_document(text, "svdgp");
  return rebuild([&] {
    SvdGpModel m;
    m.p = j.at("p").get<int>();
    m.basis = matrix_from<Matrix>(j.at("basis"), m.p);
    m.singular_values = vector_from(j.at("spectrum"));
    m.residual_var = to_double(j.at("residual_var"));
    m.centered = j.at("centered").get<bool>();
    m.center = vector_from(j.at("center"));
    m.X = Design(matrix_from<PointMatrix>(j.at("X")));
    for (const auto& c : j.at("coefficients")) m.coefficients.push_back(gp_from(c));
    if (m.p < 1 || m.basis.cols() != m.p || static_cast<int>(m.coefficients.size()) != m.p ||
        m.center.size() != m.basis.rows()) {
      throw Error(ErrorKind::CorruptFile, "svdgp blocks are inconsistent");
    }
    return m;
  });
}

void save_svdgp(const SvdGpModel& model, const std::filesystem::path& path) {
  write_text(path, svdgp_to_json(model));
}

SvdGpModel load_svdgp(const std::filesystem::path& path) { return svdgp_from_json(read_text(path)); }

}  // namespace gpemu
