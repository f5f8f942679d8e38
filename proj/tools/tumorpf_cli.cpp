// tumorpf simulate|optimize|analyze|verify --config run.json [options]

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tumorpf/tumorpf.h"

namespace {

// Exit codes: 0 ok, 2 config, 3 solver, 4 verification gate.
int exit_code(tpf_status s) {
  switch (s) {
    case TPF_OK:
    case TPF_ERROR_CONFIG:
    case TPF_ERROR_SOLVER:
    case TPF_ERROR_VERIFY:
      return static_cast<int>(s);
    case TPF_ERROR_ARGUMENT:
    case TPF_ERROR_IO:
      return 2;
    default:
      return 3;
  }
}

int report(tpf_status s, const char* context) {
  std::fprintf(stderr, "tumorpf: %s: %s\n", context, tpf_last_error());
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field tumor growth: simulation, optimal control and verification"};
  app.set_version_flag("--version", tpf_version());

  std::string command, config_path, out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  bool quiet = false, force = false;

  app.add_option("command", command, "simulate | optimize | analyze | verify")
      ->required()
      ->check(CLI::IsMember({"simulate", "optimize", "analyze", "verify"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out-dir", out_dir, "output directory (overrides output.out_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for the SSC sampler and the verification suite");
  app.add_option("--set", overrides, "override a config entry, e.g. --set time.steps=400")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_flag("--quiet", quiet, "no progress output");
  app.add_flag("--force", force, "write into a non-empty output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  tpf_config* config = nullptr;
  tpf_status s = tpf_config_load(config_path.c_str(), &config);
  if (s != TPF_OK) return report(s, config_path.c_str());

  int rc = 0;
  for (const auto& o : overrides) {
    s = tpf_config_set(config, o.c_str());
    if (s != TPF_OK) {
      rc = report(s, ("--set " + o).c_str());
      break;
    }
  }
  if (rc == 0 && seed_opt->count() > 0) tpf_config_set_seed(config, seed);
  if (rc == 0 && !out_dir.empty()) {
    s = tpf_config_set_out_dir(config, out_dir.c_str());
    if (s != TPF_OK) rc = report(s, "--out-dir");
  }
  if (rc == 0) {
    s = tpf_run(config, command.c_str(), (quiet ? TPF_RUN_QUIET : 0) | (force ? TPF_RUN_FORCE : 0));
    if (s != TPF_OK) rc = report(s, command.c_str());
  }
  tpf_config_free(config);
  return rc;
}
