#include "tumorpf/tumorpf.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <memory>
#include <new>
#include <string>

#include "tumorpf/config.hpp"
#include "tumorpf/optimize.hpp"
#include "tumorpf/run.hpp"

struct tpf_config {
  nlohmann::json raw;
  std::string base_dir;
  tpf::RunConfig parsed;
};

struct tpf_problem {
  tpf::Instance instance;
};

struct tpf_state {
  tpf::StateTrajectory traj;
};

namespace {

thread_local std::string last_error;

tpf_status status_of(tpf::ErrorCode code) {
  switch (code) {
    case tpf::ErrorCode::InvalidArgument: return TPF_ERROR_ARGUMENT;
    case tpf::ErrorCode::Io: return TPF_ERROR_IO;
    default: return static_cast<tpf_status>(tpf::exit_status(code));
  }
}

template <class Fn>
tpf_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    return fn();
  } catch (const tpf::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  }
  return TPF_ERROR_INTERNAL;
}

tpf_status bad_argument(const char* what) {
  last_error = what;
  return TPF_ERROR_ARGUMENT;
}

char* duplicate(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

tpf::Control control_from(const tpf_problem* pb, const double* u1, const double* u2) {
  const tpf::Instance& in = pb->instance;
  if (!u1 && !u2) return in.initial;
  if (!u1 || !u2) tpf::fail(tpf::ErrorCode::InvalidArgument, "give both control components or neither");
  const auto m = static_cast<Eigen::Index>(in.problem.grid.size());
  tpf::Control u = tpf::Control::zeros(in.problem.grid, in.problem.time);
  for (int n = 0; n < in.problem.time.steps; ++n) {
    u.u1[n] = Eigen::Map<const Eigen::VectorXd>(u1 + n * m, m);
    u.u2[n] = Eigen::Map<const Eigen::VectorXd>(u2 + n * m, m);
  }
  return u;
}

}  // namespace

extern "C" {

const char* tpf_version(void) { return "1.0.0"; }

const char* tpf_last_error(void) { return last_error.c_str(); }

const char* tpf_status_string(tpf_status status) {
  switch (status) {
    case TPF_OK: return "ok";
    case TPF_ERROR_ARGUMENT: return "invalid argument";
    case TPF_ERROR_CONFIG: return "configuration error";
    case TPF_ERROR_SOLVER: return "solver failure";
    case TPF_ERROR_VERIFY: return "verification failure";
    case TPF_ERROR_IO: return "i/o error";
    case TPF_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

tpf_status tpf_config_load(const char* path, tpf_config** out) {
  if (!path || !out) return bad_argument("tpf_config_load: null argument");
  return guarded([&] {
    auto c = std::make_unique<tpf_config>();
    c->raw = tpf::read_config_json(path);
    const std::string dir = std::filesystem::path(path).parent_path().string();
    c->base_dir = dir.empty() ? "." : dir;
    c->parsed = tpf::parse_config(c->raw, c->base_dir);
    *out = c.release();
    return TPF_OK;
  });
}

tpf_status tpf_config_parse(const char* json_text, const char* base_dir, tpf_config** out) {
  if (!json_text || !out) return bad_argument("tpf_config_parse: null argument");
  return guarded([&] {
    auto c = std::make_unique<tpf_config>();
    c->raw = nlohmann::json::parse(json_text, nullptr, false, true);
    if (c->raw.is_discarded()) tpf::fail(tpf::ErrorCode::Config, "configuration is not valid JSON");
    c->base_dir = base_dir ? base_dir : ".";
    c->parsed = tpf::parse_config(c->raw, c->base_dir);
    *out = c.release();
    return TPF_OK;
  });
}

tpf_status tpf_config_set(tpf_config* config, const char* assignment) {
  if (!config || !assignment) return bad_argument("tpf_config_set: null argument");
  return guarded([&] {
    nlohmann::json raw = config->raw;
    tpf::apply_override(raw, assignment);
    tpf::RunConfig parsed = tpf::parse_config(raw, config->base_dir);
    // Seed and output directory set through the API survive later overrides
    // unless the override names them.
    const std::string key(assignment, std::strcspn(assignment, "="));
    if (key != "ssc.seed" && key != "ssc") parsed.ssc.seed = config->parsed.ssc.seed;
    if (key != "verify.seed" && key != "verify") parsed.verify.seed = config->parsed.verify.seed;
    if (key != "output.out_dir" && key != "output") parsed.output.out_dir = config->parsed.output.out_dir;
    config->raw = std::move(raw);
    config->parsed = std::move(parsed);
    return TPF_OK;
  });
}

tpf_status tpf_config_set_seed(tpf_config* config, uint64_t seed) {
  if (!config) return bad_argument("tpf_config_set_seed: null config");
  config->parsed.ssc.seed = seed;
  config->parsed.verify.seed = seed;
  return TPF_OK;
}

tpf_status tpf_config_set_out_dir(tpf_config* config, const char* dir) {
  if (!config || !dir || !*dir) return bad_argument("tpf_config_set_out_dir: empty directory");
  config->parsed.output.out_dir = dir;
  return TPF_OK;
}

tpf_status tpf_config_resolved(const tpf_config* config, char** json_out) {
  if (!config || !json_out) return bad_argument("tpf_config_resolved: null argument");
  return guarded([&] {
    *json_out = duplicate(tpf::to_json(config->parsed).dump(2));
    return TPF_OK;
  });
}

void tpf_config_free(tpf_config* config) { delete config; }

void tpf_string_free(char* s) { std::free(s); }

tpf_status tpf_run(const tpf_config* config, const char* subcommand, int flags) {
  if (!config || !subcommand) return bad_argument("tpf_run: null argument");
  return guarded([&] {
    tpf::RunOptions opt;
    opt.quiet = (flags & TPF_RUN_QUIET) != 0;
    opt.force = (flags & TPF_RUN_FORCE) != 0;
    const int status = tpf::run_subcommand(subcommand, config->parsed, opt, std::cerr);
    if (status == tpf::kExitVerify) last_error = "gated verification checks failed";
    if (status == tpf::kExitSolver) last_error = "optimizer did not reach the stationarity tolerance";
    return static_cast<tpf_status>(status);
  });
}

tpf_status tpf_problem_create(const tpf_config* config, tpf_problem** out) {
  if (!config || !out) return bad_argument("tpf_problem_create: null argument");
  return guarded([&] {
    *out = new tpf_problem{tpf::build_instance(config->parsed)};
    return TPF_OK;
  });
}

void tpf_problem_free(tpf_problem* problem) { delete problem; }

tpf_status tpf_problem_size(const tpf_problem* problem, size_t* nodes, int* steps) {
  if (!problem) return bad_argument("tpf_problem_size: null problem");
  if (nodes) *nodes = problem->instance.problem.grid.size();
  if (steps) *steps = problem->instance.problem.time.steps;
  return TPF_OK;
}

tpf_status tpf_simulate(const tpf_problem* problem, const double* u1, const double* u2, tpf_state** out) {
  if (!problem || !out) return bad_argument("tpf_simulate: null argument");
  return guarded([&] {
    const tpf::Control u = control_from(problem, u1, u2);
    *out = new tpf_state{problem->instance.problem.solve(u)};
    return TPF_OK;
  });
}

void tpf_state_free(tpf_state* state) { delete state; }

tpf_status tpf_state_field(const tpf_state* state, int level, int component, double* out, size_t n) {
  if (!state || !out) return bad_argument("tpf_state_field: null argument");
  const tpf::StateTrajectory& t = state->traj;
  if (level < 0 || level > t.steps()) return bad_argument("tpf_state_field: level out of range");
  if (component < 0 || component > 2) return bad_argument("tpf_state_field: component must be 0, 1 or 2");
  const tpf::FieldSeries* s[] = {&t.mu, &t.phi, &t.sigma};
  const tpf::Field& f = (*s[component])[static_cast<std::size_t>(level)];
  if (n != static_cast<size_t>(f.size())) return bad_argument("tpf_state_field: buffer size differs from node count");
  std::memcpy(out, f.data(), n * sizeof(double));
  return TPF_OK;
}

tpf_status tpf_evaluate(const tpf_problem* problem, const double* u1, const double* u2, double* cost,
                        double* grad_u1, double* grad_u2) {
  if (!problem) return bad_argument("tpf_evaluate: null problem");
  return guarded([&] {
    const tpf::Problem& pb = problem->instance.problem;
    const tpf::Evaluation ev = tpf::evaluate(pb, control_from(problem, u1, u2));
    if (cost) *cost = ev.J;
    const auto m = static_cast<std::size_t>(pb.grid.size());
    for (int n = 0; n < pb.time.steps; ++n) {
      if (grad_u1) std::memcpy(grad_u1 + n * m, ev.gradient.grad.u1[n].data(), m * sizeof(double));
      if (grad_u2) std::memcpy(grad_u2 + n * m, ev.gradient.grad.u2[n].data(), m * sizeof(double));
    }
    return TPF_OK;
  });
}

}  // extern "C"
