#include "tumorpf/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SparseLU>

#include "step_system.hpp"
#include "tumorpf/error.hpp"

namespace tpf {

namespace {

using Eigen::Index;
using Lu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

double mass_of(const Grid& grid, const ModelParams& params, const Field& mu, const Field& phi,
               const Field& sigma) {
  return (grid.weights().array() * (params.alpha * mu.array() + phi.array() + sigma.array())).sum();
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

// Damped Newton on one step. Every accepted iterate keeps the stage phi
// values inside the margin band when the potential is singular.
NewtonOutcome newton_step(const detail::StepSystem& sys, const SchemePotential& potential,
                          const Eigen::VectorXd& y_prev, const Field& u1, const Field& u2,
                          const SolverOptions& opt, double step_cap, Eigen::VectorXd& Z, Lu& lu,
                          bool& analyzed, int step) {
  const bool guard = potential.needs_separation();
  const double lo = potential.spec().lower() + opt.sep_margin;
  const double hi = potential.spec().upper() - opt.sep_margin;
  // The tolerance is relative to the magnitude of the terms in the residual,
  // which bounds the attainable accuracy in floating point.
  NewtonOutcome out;
  Eigen::VectorXd G, Gt;
  double scale = 0.0, scale_t = 0.0;
  sys.residual(Z, y_prev, u1, u2, G, &scale);
  double r = G.cwiseAbs().maxCoeff();
  bool have_lu = false;
  auto tol = [&](double sc) { return opt.nonlinear_tol * std::max(1.0, sc); };

  for (int it = 0; it <= opt.max_newton; ++it) {
    if (!std::isfinite(r)) break;
    if (r <= tol(scale)) {
      // One simplified-Newton correction with the last factorization takes
      // the converged iterate to round-off level.
      if (r > 0.0 && have_lu) {
        Eigen::VectorXd Zp = Z - lu.solve(G);
        if (!guard || sys.phi_inside(Zp, lo, hi)) {
          sys.residual(Zp, y_prev, u1, u2, Gt);
          const double rp = Gt.cwiseAbs().maxCoeff();
          if (rp <= r) {
            Z.swap(Zp);
            r = rp;
          }
        }
      }
      out.converged = true;
      out.residual = r;
      return out;
    }
    if (it == opt.max_newton) break;

    const Eigen::SparseMatrix<double> A = sys.jacobian(Z, u1, true);
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      fail(ErrorCode::SingularMatrix, "singular Newton matrix in step " + std::to_string(step));
    have_lu = true;
    Eigen::VectorXd delta = -lu.solve(G);
    const double dmax = delta.cwiseAbs().maxCoeff();
    if (std::isfinite(step_cap) && dmax > step_cap) delta *= step_cap / dmax;

    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt, lambda *= 0.5) {
      Eigen::VectorXd Zt = Z + lambda * delta;
      if (guard && !sys.phi_inside(Zt, lo, hi)) continue;
      sys.residual(Zt, y_prev, u1, u2, Gt, &scale_t);
      const double rt = Gt.cwiseAbs().maxCoeff();
      if (std::isfinite(rt) && (rt <= (1.0 - 1e-4 * lambda) * r || rt <= tol(scale_t))) {
        Z.swap(Zt);
        G.swap(Gt);
        r = rt;
        scale = scale_t;
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) break;
  }
  out.residual = r;
  return out;
}

}  // namespace

InitialData InitialData::zeros(const Grid& grid) {
  return InitialData{grid.zeros(), grid.zeros(), grid.zeros()};
}

void InitialData::check(const Grid& grid, const PotentialSpec& potential) const {
  grid.check(mu0, "initial mu0");
  grid.check(phi0, "initial phi0");
  grid.check(sigma0, "initial sigma0");
  if (!potential.singular()) return;
  for (Index i = 0; i < phi0.size(); ++i)
    if (!(phi0[i] > potential.lower() && phi0[i] < potential.upper()))
      throw SeparationViolation(phi0[i], potential.lower(), potential.upper(), i, 0);
}

Field StateTrajectory::stage_field(int step, int stage, int comp) const {
  const Eigen::VectorXd& Z = stages.at(static_cast<std::size_t>(step - 1));
  const Index m = Z.size() / (3 * stage_count);
  Field f(m);
  for (Index i = 0; i < m; ++i) f[i] = Z[(i * stage_count + stage) * 3 + comp];
  return f;
}

StateTrajectory solve_state(const ModelParams& params, const PotentialSpec& potential,
                            const NonlinearitySpec& nonlin, const Control& control,
                            const InitialData& init, const Grid& grid, const TimeGrid& time,
                            const SolverOptions& options) {
  params.validate();
  control.check(grid, time, "solve_state");
  init.check(grid, potential);
  const SchemePotential scheme_potential(potential, options.yosida_eps);
  const RadauTableau tableau = RadauTableau::make(options.stages);
  const detail::StepSystem sys(grid, params, scheme_potential, nonlin, tableau, time.dt());

  StateTrajectory traj;
  traj.time = time;
  traj.stage_count = tableau.stages;
  traj.domain_lower = potential.lower();
  traj.domain_upper = potential.upper();
  traj.singular = potential.singular();
  traj.mu.reserve(time.levels());
  traj.phi.reserve(time.levels());
  traj.sigma.reserve(time.levels());
  traj.stages.reserve(time.steps);
  traj.mu.push_back(init.mu0);
  traj.phi.push_back(init.phi0);
  traj.sigma.push_back(init.sigma0);

  StepDiagnostics d0;
  d0.phi_min = init.phi0.minCoeff();
  d0.phi_max = init.phi0.maxCoeff();
  traj.diagnostics.push_back(d0);

  Eigen::VectorXd y = detail::interleave(init.mu0, init.phi0, init.sigma0);
  Lu lu;
  bool analyzed = false;

  for (int n = 1; n <= time.steps; ++n) {
    const Field& u1 = control.u1[n - 1];
    const Field& u2 = control.u2[n - 1];
    Eigen::VectorXd Z;
    NewtonOutcome res;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
      const double cap = attempt == 0 ? std::numeric_limits<double>::infinity() : 0.25 / attempt;
      Z = sys.replicate(y);
      res = newton_step(sys, scheme_potential, y, u1, u2, options, cap, Z, lu, analyzed, n);
      if (res.converged) break;
    }
    if (!res.converged) {
      fail(ErrorCode::StepRejected,
           "Newton failed in step " + std::to_string(n) + " (t = " + std::to_string(time.time(n)) +
               ") after " + std::to_string(options.max_retries + 1) +
               " attempts; last residual " + std::to_string(res.residual));
    }
    if (scheme_potential.needs_separation()) {
      for (Index i = 0; i < sys.nodes(); ++i)
        for (int j = 0; j < sys.stages(); ++j) {
          const double r = Z[sys.index(i, j, 1)];
          if (!(r > potential.lower() && r < potential.upper()))
            throw SeparationViolation(r, potential.lower(), potential.upper(), i, n);
        }
    }

    y = sys.last_stage(Z);
    traj.stages.push_back(Z);
    traj.mu.push_back(detail::component(y, 0));
    traj.phi.push_back(detail::component(y, 1));
    traj.sigma.push_back(detail::component(y, 2));

    StepDiagnostics d;
    d.time = time.time(n);
    d.phi_min = traj.phi.back().minCoeff();
    d.phi_max = traj.phi.back().maxCoeff();
    d.newton_iterations = res.iterations;
    traj.diagnostics.push_back(d);
  }

  const auto mass = mass_balance_residual(traj, control, params, nonlin, grid, time);
  const EnergyReport energy =
      energy_diagnostic(traj, params, scheme_potential, grid, options.energy_blowup_factor);
  for (int n = 0; n <= time.steps; ++n) {
    traj.diagnostics[n].energy = energy.series[n];
    if (n > 0) traj.diagnostics[n].mass_residual = mass[n - 1];
  }
  traj.energy_flag = energy.flagged;
  return traj;
}

std::vector<double> mass_balance_residual(const StateTrajectory& traj, const Control& control,
                                          const ModelParams& params,
                                          const NonlinearitySpec& nonlin, const Grid& grid,
                                          const TimeGrid& time) {
  control.check(grid, time, "mass_balance_residual");
  require(traj.steps() == time.steps, ErrorCode::InvalidArgument,
          "mass_balance_residual: trajectory and time grid differ");
  const RadauTableau tab = RadauTableau::make(traj.stage_count);
  const Field& w = grid.weights();
  std::vector<double> out;
  out.reserve(time.steps);
  double prev = mass_of(grid, params, traj.mu[0], traj.phi[0], traj.sigma[0]);
  for (int n = 1; n <= time.steps; ++n) {
    const double cur = mass_of(grid, params, traj.mu[n], traj.phi[n], traj.sigma[n]);
    double source = 0.0;
    for (int j = 0; j < traj.stage_count; ++j) {
      const Field phi = traj.stage_field(n, j, 1);
      double s = 0.0;
      for (Index i = 0; i < phi.size(); ++i)
        s += w[i] * (-nonlin.h.eval(phi[i], 0) * control.u1[n - 1][i] + control.u2[n - 1][i]);
      source += tab.b[j] * s;
    }
    source *= time.dt();
    const double scale = std::max({1.0, std::abs(cur), std::abs(prev), std::abs(source)});
    out.push_back(std::abs(cur - prev - source) / scale);
    prev = cur;
  }
  return out;
}

EnergyReport energy_diagnostic(const StateTrajectory& traj, const ModelParams& params,
                               const SchemePotential& potential, const Grid& grid,
                               double blowup_factor) {
  EnergyReport rep;
  const Field& w = grid.weights();
  for (std::size_t n = 0; n < traj.phi.size(); ++n) {
    const Field& mu = traj.mu[n];
    const Field& phi = traj.phi[n];
    const Field& sigma = traj.sigma[n];
    double f1 = 0.0;
    for (Index i = 0; i < phi.size(); ++i) f1 += w[i] * potential.convex_energy(phi[i]);
    const double grad2 = -inner(grid, laplacian_apply(grid, phi), phi);
    const double e = 0.5 * (params.alpha * inner(grid, mu, mu) + inner(grid, phi, phi) + grad2 +
                            2.0 * f1 + inner(grid, sigma, sigma));
    rep.series.push_back(e);
  }
  const double e0 = rep.series.front();
  for (double e : rep.series)
    if (!std::isfinite(e) || e > blowup_factor * e0) rep.flagged = true;
  return rep;
}

std::pair<double, double> separation_bounds(const StateTrajectory& traj) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& phi : traj.phi) {
    lo = std::min(lo, phi.minCoeff());
    hi = std::max(hi, phi.maxCoeff());
  }
  for (int n = 1; n <= traj.steps(); ++n)
    for (int j = 0; j < traj.stage_count; ++j) {
      const Field phi = traj.stage_field(n, j, 1);
      lo = std::min(lo, phi.minCoeff());
      hi = std::max(hi, phi.maxCoeff());
    }
  if (traj.singular) {
    if (!(lo > traj.domain_lower)) throw SeparationViolation(lo, traj.domain_lower, traj.domain_upper);
    if (!(hi < traj.domain_upper)) throw SeparationViolation(hi, traj.domain_lower, traj.domain_upper);
  }
  return {lo, hi};
}

double series_norm(const Grid& grid, const TimeGrid& time, const FieldSeries& a) {
  require(static_cast<int>(a.size()) == time.levels(), ErrorCode::InvalidArgument,
          "series_norm: one snapshot per time level expected");
  double s = 0.0;
  for (int n = 0; n <= time.steps; ++n) s += time.trapezoid_weight(n) * inner(grid, a[n], a[n]);
  return std::sqrt(time.dt() * s);
}

double trajectory_distance(const Grid& grid, const StateTrajectory& a, const StateTrajectory& b) {
  require(a.steps() == b.steps(), ErrorCode::InvalidArgument,
          "trajectory_distance: step counts differ");
  double s = 0.0;
  for (int n = 0; n <= a.steps(); ++n) {
    const double tw = a.time.trapezoid_weight(n);
    const Field dm = a.mu[n] - b.mu[n];
    const Field dp = a.phi[n] - b.phi[n];
    const Field ds = a.sigma[n] - b.sigma[n];
    s += tw * (inner(grid, dm, dm) + inner(grid, dp, dp) + inner(grid, ds, ds));
  }
  return std::sqrt(a.time.dt() * s);
}

}  // namespace tpf
