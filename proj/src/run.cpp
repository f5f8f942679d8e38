#include "tumorpf/run.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>

#include "tumorpf/field_io.hpp"
#include "tumorpf/verify.hpp"

namespace tpf {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Config:
    case ErrorCode::Hypothesis:
    case ErrorCode::Io:
      return kExitConfig;
    default:
      return kExitSolver;
  }
}

namespace {

std::string level_name(const char* stem, int level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05d.csv", stem, level);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Output {
 public:
  Output(const std::string& dir, bool force) : dir_(dir) {
    std::error_code ec;
    if (fs::exists(dir_, ec)) {
      require(fs::is_directory(dir_, ec), ErrorCode::Config,
              "output.out_dir: " + dir + " exists and is not a directory");
      require(force || fs::is_empty(dir_, ec), ErrorCode::Config,
              "output.out_dir: " + dir + " is not empty (use --force to overwrite)");
    }
    fs::create_directories(dir_, ec);
    require(!ec, ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string subdir(const std::string& name) const {
    std::error_code ec;
    fs::create_directories(dir_ / name, ec);
    require(!ec, ErrorCode::Io, "cannot create " + path(name) + ": " + ec.message());
    return path(name);
  }

 private:
  fs::path dir_;
};

struct Logger {
  std::ostream& os;
  bool quiet;
  template <class... Args>
  void operator()(const Args&... args) const {
    if (quiet) return;
    (os << ... << args) << '\n';
    os.flush();
  }
};

void write_state(const Output& out, const Instance& inst, const StateTrajectory& st,
                 const std::vector<int>& levels) {
  const std::string dir = out.subdir("snapshots");
  for (int n : levels)
    write_node_csv(dir + "/" + level_name("state", n), inst.problem.grid, {"mu", "phi", "sigma"},
                   {&st.mu[n], &st.phi[n], &st.sigma[n]});
  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < st.diagnostics.size(); ++n) {
    const StepDiagnostics& d = st.diagnostics[n];
    rows.push_back({static_cast<double>(n), d.time, d.mass_residual, d.energy, d.phi_min, d.phi_max,
                    static_cast<double>(d.newton_iterations)});
  }
  write_table_csv(out.path("diagnostics.csv"),
                  {"step", "time", "mass_residual", "energy", "phi_min", "phi_max", "newton_iterations"},
                  rows);
}

int simulate(const RunConfig& c, const Output& out, const Logger& log) {
  const Instance inst = build_instance(c);
  log("simulate: ", inst.problem.grid.size(), " nodes, ", c.steps, " steps");
  const StateTrajectory st = inst.problem.solve(inst.initial);
  write_state(out, inst, st, snapshot_levels(c));
  double worst = 0.0;
  for (const auto& d : st.diagnostics) worst = std::max(worst, d.mass_residual);
  log("simulate: phi in [", st.diagnostics.back().phi_min, ", ", st.diagnostics.back().phi_max,
      "] at T, worst mass residual ", worst, st.energy_flag ? " (energy growth flagged)" : "");
  return kExitOk;
}

PgdResult optimize_and_write(const RunConfig& c, const Instance& inst, const Output& out,
                             const Logger& log) {
  const Problem& pb = inst.problem;
  log("optimize: ", pb.grid.size(), " nodes, ", c.steps, " steps, tol ", c.optimizer.tol);
  const Control u0 = project_admissible(inst.initial, inst.box);
  PgdResult res = projected_gradient(u0, pb, inst.box, c.optimizer);

  std::vector<std::vector<double>> rows;
  for (const PgdRecord& r : res.history)
    rows.push_back({static_cast<double>(r.iter), r.J, r.stationarity, r.step});
  write_table_csv(out.path("history.csv"), {"iter", "J", "stationarity", "step"}, rows);
  write_control_csv(out.path("control.csv"), pb.grid, pb.time, res.u);
  const Control& g = res.at_u.gradient.grad;
  write_level_csv(out.path("gradient.csv"), pb.grid, pb.time, {"grad_u1", "grad_u2"}, {&g.u1, &g.u2});

  const PgdRecord& last = res.history.back();
  log("optimize: ", res.converged ? "converged" : "stopped", " after ", last.iter, " iterations, J = ",
      last.J, ", stationarity = ", last.stationarity);
  return res;
}

int optimize(const RunConfig& c, const Output& out, const Logger& log) {
  const Instance inst = build_instance(c);
  const PgdResult res = optimize_and_write(c, inst, out, log);
  if (!res.converged) {
    log("optimize: stationarity tolerance ", c.optimizer.tol, " not reached within ", c.optimizer.max_iter,
        " iterations");
    return kExitSolver;
  }
  return kExitOk;
}

int analyze(const RunConfig& c, const Output& out, const Logger& log) {
  const Instance inst = build_instance(c);
  const Problem& pb = inst.problem;
  const PgdResult res = optimize_and_write(c, inst, out, log);
  const Evaluation& ev = res.at_u;

  const std::string dir = out.subdir("adjoint");
  for (int n : snapshot_levels(c))
    write_node_csv(dir + "/" + level_name("adjoint", n), pb.grid, {"p", "q", "r"},
                   {&ev.adjoint.p[n], &ev.adjoint.q[n], &ev.adjoint.r[n]});

  const double tau = c.ssc.tau > 0.0 ? c.ssc.tau : default_tau(ev.gradient);
  const ActiveSets sets = strongly_active_sets(ev.gradient, tau);
  FieldSeries a1, a2;
  for (int n = 0; n < pb.time.steps; ++n) {
    a1.push_back(sets.A1[n].cast<double>().matrix());
    a2.push_back(sets.A2[n].cast<double>().matrix());
  }
  write_level_csv(out.path("active_sets.csv"), pb.grid, pb.time, {"A1", "A2"}, {&a1, &a2});
  log("analyze: tau = ", tau, ", ", sets.count(), " strongly active values");

  SscOptions opt = c.ssc;
  opt.tau = tau;
  const SscReport rep = ssc_certificate(res.u, pb, inst.box, opt);
  ordered_json j;
  j["tau"] = rep.tau;
  j["n_samples"] = rep.n_samples;
  j["min_rayleigh"] = rep.min_rayleigh;
  j["delta_estimate"] = rep.delta_estimate;
  j["satisfied"] = rep.satisfied;
  j["seed"] = rep.seed;
  j["used_samples"] = rep.used_samples;
  j["max_rayleigh"] = rep.max_rayleigh;
  j["stationarity"] = rep.stationarity;
  j["active_count"] = rep.active_count;
  j["optimizer_converged"] = res.converged;
  j["quotients"] = rep.quotients;
  write_json(out.path("ssc_report.json"), j);
  log("analyze: min Rayleigh quotient ", rep.min_rayleigh, " over ", rep.used_samples, " samples, ",
      rep.satisfied ? "second-order condition satisfied" : "second-order condition NOT satisfied");
  return res.converged ? kExitOk : kExitSolver;
}

struct ProgressContext {
  const Logger* log;
  std::chrono::steady_clock::time_point start;
};

void progress(const CheckEntry& e, void* user) {
  const auto* ctx = static_cast<const ProgressContext*>(user);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx->start).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%7.1f s", s);
  (*ctx->log)("verify: ", buf, "  ", e.pass ? "pass " : "FAIL ", e.name, e.gated ? "" : " (not gated)");
}

int verify(const RunConfig& c, const Output& out, const Logger& log) {
  const Instance fine = build_instance(c);
  const Instance coarse = build_instance(c, 1);
  VerifySetup s;
  s.problem = &fine.problem;
  s.box = &fine.box;
  s.initial = &fine.initial;
  s.coarse = &coarse.problem;
  s.coarse_box = &coarse.box;
  s.coarse_initial = &coarse.initial;
  s.pgd = c.optimizer;
  s.ssc = c.ssc;
  s.yosida_eps = c.verify.yosida_eps;
  s.gradient_dirs = c.verify.gradient_dirs;
  s.stability_pairs = c.verify.stability_pairs;
  s.seed = c.verify.seed;
  log("verify: ", fine.problem.grid.size(), " nodes / ", c.steps, " steps, coarse ",
      coarse.problem.grid.size(), " / ", coarse.problem.time.steps);

  ProgressContext ctx{&log, std::chrono::steady_clock::now()};
  const std::vector<CheckEntry> entries = run_verification(s, progress, &ctx);

  bool pass = true;
  int failed = 0;
  ordered_json list = ordered_json::array();
  for (const CheckEntry& e : entries) {
    if (e.gated && !e.pass) pass = false, ++failed;
    ordered_json je;
    je["name"] = e.name;
    je["anchor"] = e.anchor;
    je["metrics"] = e.metrics;
    je["pass"] = e.pass;
    je["gated"] = e.gated;
    list.push_back(std::move(je));
  }
  ordered_json j;
  j[kTimestampKey] = utc_timestamp();
  j["pass"] = pass;
  j["checks"] = entries.size();
  j["failed"] = failed;
  j["entries"] = std::move(list);
  write_json(out.path("verify_report.json"), j);
  log("verify: ", entries.size() - failed, "/", entries.size(), " checks pass");
  return pass ? kExitOk : kExitVerify;
}

}  // namespace

int run_subcommand(const std::string& sub, const RunConfig& config, const RunOptions& options,
                   std::ostream& os) {
  int (*fn)(const RunConfig&, const Output&, const Logger&) = nullptr;
  if (sub == "simulate") fn = simulate;
  else if (sub == "optimize") fn = optimize;
  else if (sub == "analyze") fn = analyze;
  else if (sub == "verify") fn = verify;
  require(fn != nullptr, ErrorCode::Config,
          "unknown subcommand '" + sub + "' (simulate, optimize, analyze, verify)");

  // Surface config errors before anything touches the output directory.
  const Instance probe = build_instance(config);
  if (sub == "verify") build_instance(config, 1);
  if (sub == "analyze") require_second_order_hypotheses(probe.problem);

  const Logger log{os, options.quiet};
  const Output out(config.output.out_dir, options.force);
  write_json(out.path("resolved_config.json"), to_json(config));
  return fn(config, out, log);
}

}  // namespace tpf
