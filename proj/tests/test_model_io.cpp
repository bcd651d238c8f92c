#include <cmath>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "gpemu/csv.hpp"
#include "gpemu/design.hpp"
#include "gpemu/error.hpp"
#include "gpemu/model_io.hpp"
#include "gpemu/simulators.hpp"

using namespace gpemu;

namespace {

double smooth2(std::span<const double> x) { return std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]); }

GpModel small_model(MeanMode mode = MeanMode::Ordinary, bool noisy = false) {
  const Design x = lhd(12, 2, 3);
  Vector y(x.n());
  for (Eigen::Index i = 0; i < x.n(); ++i) y(i) = smooth2(x.point(i));
  FitOptions o = FitOptions::local_budget();
  o.seed = 4;
  const MeanBasis basis = MeanBasis::linear(2);
  return fit_model(x, y, default_kernel(2), o, mode, noisy, mode == MeanMode::Universal ? &basis : nullptr);
}

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "gpemu_test_model_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ErrorKind kind_of(const std::string& text) {
  try {
    model_from_json(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("save and load predict bitwise equal") {
    for (auto mode : {MeanMode::Simple, MeanMode::Ordinary, MeanMode::Universal}) {
      const GpModel m = small_model(mode);
      const auto path = temp_path("gp.json");
      save_model(m, path);
      const GpModel back = load_model(path);
      CHECK(back.mean_mode == mode);
      CHECK(back.spec.beta == m.spec.beta);
      CHECK(back.deviance == m.deviance);
      const Design q = lhd(100, 2, 77);
      for (Eigen::Index i = 0; i < q.n(); ++i) {
        const auto a = predict(m, q.point(i));
        const auto b = predict(back, q.point(i));
        CHECK(a.mean == b.mean);
        CHECK(a.variance == b.variance);
      }
    }
  }

  TEST_CASE("noisy model round-trip keeps the nugget") {
    const GpModel m = small_model(MeanMode::Ordinary, true);
    const GpModel back = model_from_json(model_to_json(m));
    CHECK(back.noisy);
    CHECK(back.delta == m.delta);
    CHECK(back.sigma2_eps() == m.sigma2_eps());
  }

  TEST_CASE("degenerate model stores a non-finite deviance") {
    const Design x = lhd(4, 1, 1);
    const GpModel m = fit(x, Vector::Constant(4, 2.0), default_kernel(1), FitOptions::local_budget());
    REQUIRE(m.degenerate);
    const GpModel back = model_from_json(model_to_json(m));
    CHECK(back.degenerate);
    CHECK(std::isinf(back.deviance));
    CHECK(back.deviance < 0.0);
  }

  TEST_CASE("serialization is deterministic") {
    const GpModel m = small_model();
    CHECK(model_to_json(m) == model_to_json(model_from_json(model_to_json(m))));
  }

  TEST_CASE("truncated and malformed files") {
    const std::string text = model_to_json(small_model());
    CHECK(kind_of(text.substr(0, text.size() / 2)) == ErrorKind::CorruptFile);
    CHECK(kind_of("") == ErrorKind::CorruptFile);
    CHECK(kind_of("{\"schema_version\": 1}") == ErrorKind::CorruptFile);
    auto j = nlohmann::json::parse(text);
    j["Y"] = nlohmann::json::array({1.0});
    CHECK(kind_of(j.dump()) == ErrorKind::CorruptFile);
    CHECK_THROWS_AS(load_model(temp_path("missing.json")), Error);
  }

  TEST_CASE("schema version mismatch names both versions") {
    auto j = nlohmann::json::parse(model_to_json(small_model()));
    j["schema_version"] = 0;
    try {
      model_from_json(j.dump());
      FAIL("expected SchemaVersionMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SchemaVersionMismatch);
      const std::string msg = e.what();
      CHECK(msg.find('0') != std::string::npos);
      CHECK(msg.find(std::to_string(kModelSchemaVersion)) != std::string::npos);
    }
  }

  TEST_CASE("svdgp round-trip") {
    const Design x = lhd(10, 2, 6);
    Matrix y(30, 10);
    for (Eigen::Index j = 0; j < 10; ++j) {
      const auto s = dynamic_toy(x.point(j), 30);
      for (int t = 0; t < 30; ++t) y(t, j) = s[static_cast<std::size_t>(t)];
    }
    SvdGpOptions opts;
    opts.fit = FitOptions::local_budget();
    opts.center = true;
    const SvdGpModel m = fit_svdgp(x, y, opts);
    const auto path = temp_path("svdgp.json");
    save_svdgp(m, path);
    const SvdGpModel back = load_svdgp(path);
    CHECK(back.p == m.p);
    CHECK(back.centered);
    const std::vector<double> q{0.3, 0.8};
    const auto a = predict_svdgp(m, q);
    const auto b = predict_svdgp(back, q);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    // A gp document is not an svdgp document.
    CHECK_THROWS_AS(svdgp_from_json(model_to_json(small_model())), Error);
  }
}
