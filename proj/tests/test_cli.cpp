#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tumorpf/field_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kSmall = R"cfg({
  "grid": {"shape": [17], "lengths": [2.0]},
  "time": {"T": 0.3, "steps": 12},
  "model": {"alpha": 0.5, "beta": 0.5, "chi": 0.3},
  "potential": {"kind": "logarithmic"},
  "nonlinearity": {"P": {"shape": "bump", "amplitude": 1, "width": 0.8}, "h": {"shape": "ramp"}},
  "initial": {"phi": "0.6*cos(pi*x/2)", "sigma": "0.5 + 0.2*sin(x)", "mu": "0.05*x"},
  "cost": {"b0": 0.1, "b1": 1, "target_Q": "0.5*tanh(4*(x - 1 + t))"},
  "control": {"initial": {"u1": 1, "u2": 0},
              "bounds": {"u1": {"lower": 0, "upper": 2}, "u2": {"lower": -1, "upper": 1}}},
  "optimizer": {"tol": 1e-9},
  "ssc": {"n_samples": 8},
  "verify": {"gradient_dirs": 2, "stability_pairs": 2}
})cfg";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tpf_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(TPF_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(st));
  return WEXITSTATUS(st);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path write_small(const fs::path& dir) {
  const fs::path p = dir / "small.json";
  std::ofstream(p) << kSmall;
  return p;
}

// Every regular file under a, relative path -> contents.
std::map<std::string, std::string> tree(const fs::path& a) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) out[fs::relative(e.path(), a).string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("simulate on the zero config writes all-zero snapshots") {
  const fs::path dir = scratch("zero");
  const fs::path out = dir / "out";
  REQUIRE(run("simulate --config " TPF_CONFIG_DIR "/zero.json --quiet --out-dir " + out.string()) == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(out / "snapshots")) {
    const tpf::CsvTable t = tpf::read_csv(e.path().string());
    CHECK(t.header == std::vector<std::string>{"index", "x", "mu", "phi", "sigma"});
    CHECK(t.rows.size() == 33);
    for (const auto& r : t.rows)
      for (int c = 2; c < 5; ++c) CHECK(r[c] == 0.0);
    ++files;
  }
  CHECK(files == 11);
  const tpf::CsvTable d = tpf::read_csv((out / "diagnostics.csv").string());
  CHECK(d.header == std::vector<std::string>{"step", "time", "mass_residual", "energy", "phi_min",
                                             "phi_max", "newton_iterations"});
  CHECK(d.rows.size() == 21);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  const std::string cfg = " --config " + write_small(dir).string() + " --quiet";
  const std::string out = " --out-dir " + (dir / "out").string();
  CHECK(run("simulate" + cfg + out) == 0);
  CHECK(run("simulate" + cfg + out) == 2);  // collision
  CHECK(run("simulate" + cfg + out + " --force") == 0);
  CHECK(run("simulate" + cfg + out + " --force --set model.alpha=-1") == 2);
  CHECK(run("simulate" + cfg + out + " --force --set grid.nodes=3") == 2);
  CHECK(run("simulate" + cfg + out + " --force --set initial.phi=1.2") == 2);
  CHECK(run("simulate --quiet" + out) == 2);
  CHECK(run("render" + cfg + out) == 2);
  CHECK(run("simulate --config " + (dir / "missing.json").string() + out) == 2);
  CHECK(run("optimize" + cfg + out + " --force --set optimizer.max_iter=1") == 3);
  CHECK(run("analyze" + cfg + out + " --force --set cost.b2=1") == 2);
}

TEST_CASE("optimize without tracking returns the projection of zero") {
  const fs::path dir = scratch("proj0");
  const fs::path out = dir / "out";
  REQUIRE(run("optimize --quiet --config " + write_small(dir).string() + " --out-dir " + out.string() +
              " --set cost.b1=0 --set control.bounds.u1.lower=0.5 --set control.bounds.u2.upper=-0.2") ==
          0);
  const tpf::CsvTable t = tpf::read_csv((out / "control.csv").string());
  const int c1 = t.column("u1"), c2 = t.column("u2");
  REQUIRE(c1 >= 0);
  REQUIRE(t.rows.size() == 12 * 17);
  for (const auto& r : t.rows) {
    CHECK(r[c1] == 0.5);
    CHECK(r[c2] == -0.2);
  }
  const tpf::CsvTable h = tpf::read_csv((out / "history.csv").string());
  CHECK(h.header == std::vector<std::string>{"iter", "J", "stationarity", "step"});
  CHECK(fs::exists(out / "gradient.csv"));
}

TEST_CASE("reruns are byte-identical and the resolved config reproduces them") {
  const fs::path dir = scratch("rerun");
  const std::string cfg = write_small(dir).string();
  const fs::path a = dir / "a", b = dir / "b";
  REQUIRE(run("analyze --quiet --seed 5 --config " + cfg + " --out-dir " + a.string()) == 0);
  const auto first = tree(a);
  CHECK(first.count("ssc_report.json"));
  CHECK(first.count("active_sets.csv"));
  CHECK(first.count("adjoint/adjoint_00012.csv"));
  REQUIRE(run("analyze --quiet --seed 5 --force --config " + cfg + " --out-dir " + a.string()) == 0);
  CHECK(tree(a) == first);

  const json ssc = json::parse(first.at("ssc_report.json"));
  for (const char* k : {"tau", "n_samples", "min_rayleigh", "delta_estimate", "satisfied", "seed"})
    CHECK(ssc.contains(k));
  CHECK(ssc["seed"] == 5);

  // Same run from the emitted configuration, into another directory.
  REQUIRE(run("analyze --quiet --config " + (a / "resolved_config.json").string() + " --out-dir " + b.string()) ==
          0);
  auto second = tree(b);
  const json ra = json::parse(first.at("resolved_config.json"));
  json rb = json::parse(second.at("resolved_config.json"));
  CHECK(rb["output"]["out_dir"] == b.string());
  rb["output"]["out_dir"] = ra["output"]["out_dir"];
  CHECK(rb == ra);
  second.erase("resolved_config.json");
  auto expected = first;
  expected.erase("resolved_config.json");
  CHECK(second == expected);
}

TEST_CASE("verify report structure; only the timestamp differs between reruns") {
  const fs::path dir = scratch("verify");
  const std::string cfg = write_small(dir).string();
  const fs::path out = dir / "out";
  const int rc = run("verify --quiet --config " + cfg + " --out-dir " + out.string() +
                     " --set time.steps=24 --set verify.gradient_dirs=1");
  CHECK((rc == 0 || rc == 4));
  const std::string text = slurp(out / "verify_report.json");
  json r = json::parse(text);
  CHECK(r.contains("generated_at"));
  CHECK(r["entries"].size() >= 11);
  bool all = true;
  for (const auto& e : r["entries"]) {
    for (const char* k : {"name", "anchor", "metrics", "pass"}) CHECK(e.contains(k));
    if (e["gated"].get<bool>()) all = all && e["pass"].get<bool>();
  }
  CHECK(r["pass"] == all);
  CHECK(rc == (all ? 0 : 4));

  REQUIRE(run("verify --quiet --force --config " + cfg + " --out-dir " + out.string() +
              " --set time.steps=24 --set verify.gradient_dirs=1") == rc);
  json r2 = json::parse(slurp(out / "verify_report.json"));
  r.erase("generated_at");
  r2.erase("generated_at");
  CHECK(r.dump() == r2.dump());
}
