#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "tumorpf/tumorpf.h"

namespace fs = std::filesystem;

namespace {

const char* kSmall = R"cfg({
  "grid": {"shape": [17], "lengths": [2.0]},
  "time": {"T": 0.3, "steps": 12},
  "model": {"alpha": 0.5, "beta": 0.5, "chi": 0.3},
  "potential": {"kind": "logarithmic"},
  "nonlinearity": {"P": {"shape": "bump", "amplitude": 1, "width": 0.8}, "h": {"shape": "ramp"}},
  "initial": {"phi": "0.6*cos(pi*x/2)", "sigma": "0.5 + 0.2*sin(x)", "mu": "0.05*x"},
  "cost": {"b0": 0.1, "b1": 1, "target_Q": "0.5*tanh(4*(x - 1 + t))"},
  "control": {"initial": {"u1": "1 + 0.5*sin(x + t)", "u2": "0.3*cos(2*x - t)"},
              "bounds": {"u1": {"lower": 0, "upper": 2}}}
})cfg";

struct Config {
  tpf_config* c = nullptr;
  explicit Config(const char* text) { REQUIRE(tpf_config_parse(text, nullptr, &c) == TPF_OK); }
  ~Config() { tpf_config_free(c); }
};

std::string resolved(const tpf_config* c) {
  char* s = nullptr;
  REQUIRE(tpf_config_resolved(c, &s) == TPF_OK);
  std::string out(s);
  tpf_string_free(s);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tpf_test_capi_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::strlen(tpf_version()) > 0);
  CHECK(std::string(tpf_status_string(TPF_ERROR_CONFIG)) == "configuration error");
}

TEST_CASE("null arguments are rejected") {
  tpf_config* c = nullptr;
  CHECK(tpf_config_load(nullptr, &c) == TPF_ERROR_ARGUMENT);
  CHECK(tpf_config_parse("{}", nullptr, nullptr) == TPF_ERROR_ARGUMENT);
  CHECK(tpf_run(nullptr, "simulate", 0) == TPF_ERROR_ARGUMENT);
  CHECK(std::strlen(tpf_last_error()) > 0);
  tpf_config_free(nullptr);
  tpf_problem_free(nullptr);
  tpf_state_free(nullptr);
}

TEST_CASE("config parse, override and resolved round-trip") {
  Config a(kSmall);
  const std::string ra = resolved(a.c);
  Config b(ra.c_str());
  CHECK(resolved(b.c) == ra);

  CHECK(tpf_config_set(a.c, "time.steps=24") == TPF_OK);
  CHECK(resolved(a.c).find("\"steps\": 24") != std::string::npos);

  const std::string before = resolved(a.c);
  CHECK(tpf_config_set(a.c, "cost.b7=1") == TPF_ERROR_CONFIG);
  CHECK(std::string(tpf_last_error()).find("cost.b7") != std::string::npos);
  CHECK(resolved(a.c) == before);

  CHECK(tpf_config_set_seed(a.c, 99) == TPF_OK);
  CHECK(tpf_config_set(a.c, "time.T=0.5") == TPF_OK);
  CHECK(resolved(a.c).find("\"seed\": 99") != std::string::npos);

  tpf_config* bad = nullptr;
  CHECK(tpf_config_parse("{\"time\": ", nullptr, &bad) == TPF_ERROR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(tpf_config_load("/nonexistent/run.json", &bad) == TPF_ERROR_IO);
}

TEST_CASE("zero config simulates to zero") {
  tpf_config* c = nullptr;
  REQUIRE(tpf_config_load(TPF_CONFIG_DIR "/zero.json", &c) == TPF_OK);
  tpf_problem* p = nullptr;
  REQUIRE(tpf_problem_create(c, &p) == TPF_OK);
  size_t nodes = 0;
  int steps = 0;
  CHECK(tpf_problem_size(p, &nodes, &steps) == TPF_OK);
  CHECK(nodes == 33);
  CHECK(steps == 20);
  tpf_state* s = nullptr;
  REQUIRE(tpf_simulate(p, nullptr, nullptr, &s) == TPF_OK);
  std::vector<double> f(nodes, 1.0);
  for (int comp = 0; comp < 3; ++comp) {
    REQUIRE(tpf_state_field(s, steps, comp, f.data(), f.size()) == TPF_OK);
    for (double v : f) CHECK(v == 0.0);
  }
  CHECK(tpf_state_field(s, steps + 1, 0, f.data(), f.size()) == TPF_ERROR_ARGUMENT);
  CHECK(tpf_state_field(s, 0, 3, f.data(), f.size()) == TPF_ERROR_ARGUMENT);
  CHECK(tpf_state_field(s, 0, 0, f.data(), f.size() - 1) == TPF_ERROR_ARGUMENT);
  tpf_state_free(s);
  tpf_problem_free(p);
  tpf_config_free(c);
}

TEST_CASE("gradient agrees with central differences of the cost") {
  Config c(kSmall);
  tpf_problem* p = nullptr;
  REQUIRE(tpf_problem_create(c.c, &p) == TPF_OK);
  size_t m = 0;
  int steps = 0;
  tpf_problem_size(p, &m, &steps);
  const size_t n = m * static_cast<size_t>(steps);

  // Explicit control: the configured expressions, rebuilt here at the level
  // midpoints so the two paths must agree.
  std::vector<double> u1(n), u2(n), g1(n), g2(n), v1(n), v2(n);
  const double dt = 0.3 / steps;
  for (int k = 0; k < steps; ++k)
    for (size_t i = 0; i < m; ++i) {
      const double x = 2.0 * static_cast<double>(i) / static_cast<double>(m - 1), t = (k + 0.5) * dt;
      u1[k * m + i] = 1 + 0.5 * std::sin(x + t);
      u2[k * m + i] = 0.3 * std::cos(2 * x - t);
      v1[k * m + i] = std::cos(3 * x + 5 * t);
      v2[k * m + i] = std::sin(x * t + 1);
    }
  double J = 0.0, Jc = 0.0;
  REQUIRE(tpf_evaluate(p, u1.data(), u2.data(), &J, g1.data(), g2.data()) == TPF_OK);
  REQUIRE(tpf_evaluate(p, nullptr, nullptr, &Jc, nullptr, nullptr) == TPF_OK);
  CHECK(J == doctest::Approx(Jc).epsilon(1e-14));

  // <grad, v> in the control inner product dt * sum_k sum_i w_i (.)
  double dir = 0.0;
  const double h = 2.0 / static_cast<double>(m - 1);
  for (int k = 0; k < steps; ++k)
    for (size_t i = 0; i < m; ++i) {
      const double w = (i == 0 || i == m - 1) ? 0.5 * h : h;
      dir += dt * w * (g1[k * m + i] * v1[k * m + i] + g2[k * m + i] * v2[k * m + i]);
    }
  const double eps = 1e-4;
  auto cost_at = [&](double s) {
    std::vector<double> a1(n), a2(n);
    for (size_t i = 0; i < n; ++i) a1[i] = u1[i] + s * v1[i], a2[i] = u2[i] + s * v2[i];
    double val = 0.0;
    REQUIRE(tpf_evaluate(p, a1.data(), a2.data(), &val, nullptr, nullptr) == TPF_OK);
    return val;
  };
  const double fd = (cost_at(eps) - cost_at(-eps)) / (2 * eps);
  CHECK(fd == doctest::Approx(dir).epsilon(1e-7));

  CHECK(tpf_evaluate(p, u1.data(), nullptr, &J, nullptr, nullptr) == TPF_ERROR_ARGUMENT);
  tpf_problem_free(p);
}

TEST_CASE("runs write outputs and refuse to overwrite") {
  const fs::path dir = scratch("run");
  tpf_config* c = nullptr;
  REQUIRE(tpf_config_load(TPF_CONFIG_DIR "/zero.json", &c) == TPF_OK);
  REQUIRE(tpf_config_set_out_dir(c, dir.c_str()) == TPF_OK);
  CHECK(tpf_run(c, "simulate", TPF_RUN_QUIET) == TPF_OK);
  CHECK(fs::exists(dir / "resolved_config.json"));
  CHECK(fs::exists(dir / "diagnostics.csv"));
  CHECK(fs::exists(dir / "snapshots" / "state_00020.csv"));
  CHECK(tpf_run(c, "simulate", TPF_RUN_QUIET) == TPF_ERROR_CONFIG);
  CHECK(std::string(tpf_last_error()).find("--force") != std::string::npos);
  CHECK(tpf_run(c, "simulate", TPF_RUN_QUIET | TPF_RUN_FORCE) == TPF_OK);
  CHECK(tpf_run(c, "plot", TPF_RUN_QUIET | TPF_RUN_FORCE) == TPF_ERROR_CONFIG);
  tpf_config_free(c);
}

TEST_CASE("optimizer stopping short is a solver failure") {
  Config c(kSmall);
  const fs::path dir = scratch("opt");
  REQUIRE(tpf_config_set_out_dir(c.c, dir.c_str()) == TPF_OK);
  REQUIRE(tpf_config_set(c.c, "optimizer.max_iter=1") == TPF_OK);
  CHECK(tpf_run(c.c, "optimize", TPF_RUN_QUIET) == TPF_ERROR_SOLVER);
  CHECK(fs::exists(dir / "control.csv"));
}
