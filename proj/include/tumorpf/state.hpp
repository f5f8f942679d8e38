#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tumorpf/grid.hpp"
#include "tumorpf/model.hpp"
#include "tumorpf/time_scheme.hpp"

namespace tpf {

struct InitialData {
  Field mu0;
  Field phi0;
  Field sigma0;

  static InitialData zeros(const Grid& grid);
  /// Throws InvalidArgument on shape mismatch and SeparationViolation when
  /// phi0 touches the boundary of a singular potential's domain.
  void check(const Grid& grid, const PotentialSpec& potential) const;
};

struct SolverOptions {
  double nonlinear_tol = 1e-12;      // max-norm residual, relative to term size
  int max_newton = 50;
  int max_backtracks = 40;
  int max_retries = 2;               // damped restarts before rejecting a step
  double sep_margin = 1e-8;          // iterates keep phi in (r_- + m, r_+ - m)
  double yosida_eps = 0.0;           // Yosida level; required for the obstacle
  int stages = 2;                    // Radau IIA stages (1 = implicit Euler)
  double energy_blowup_factor = 1e3;
};

struct StepDiagnostics {
  double time = 0.0;
  double mass_residual = 0.0;  // relative, see mass_balance_residual
  double energy = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  int newton_iterations = 0;
};

/// Discrete solution of the state system on a uniform time grid.
///
/// mu/phi/sigma hold steps + 1 snapshots; `stages[n]` is the converged
/// Radau stage vector of step n + 1 (layout ((node*s)+stage)*3 + comp), kept
/// for the sensitivity and adjoint solvers.
struct StateTrajectory {
  TimeGrid time;
  int stage_count = 1;
  FieldSeries mu, phi, sigma;
  std::vector<Eigen::VectorXd> stages;
  std::vector<StepDiagnostics> diagnostics;  // one per snapshot
  double domain_lower = 0.0;
  double domain_upper = 0.0;
  bool singular = false;
  bool energy_flag = false;

  int steps() const noexcept { return time.steps; }
  /// Component comp (0 mu, 1 phi, 2 sigma) of stage `stage` in step `step`
  /// (1-based, the step that ends at t_step).
  Field stage_field(int step, int stage, int comp) const;
};

/// Solves the state system with the Radau IIA scheme and a damped monolithic
/// Newton iteration per step.
StateTrajectory solve_state(const ModelParams& params, const PotentialSpec& potential,
                            const NonlinearitySpec& nonlin, const Control& control,
                            const InitialData& init, const Grid& grid, const TimeGrid& time,
                            const SolverOptions& options);

/// Per-step relative residual of the discrete mass identity
///   int(alpha mu + phi + sigma)^n - (...)^{n-1}
///     = dt sum_j b_j int(-h(phi_j) u1 + u2),
/// divided by max(1, |mass^n|, |mass^{n-1}|, |dt source|). One entry per step.
std::vector<double> mass_balance_residual(const StateTrajectory& traj, const Control& control,
                                          const ModelParams& params,
                                          const NonlinearitySpec& nonlin, const Grid& grid,
                                          const TimeGrid& time);

struct EnergyReport {
  std::vector<double> series;  // one value per snapshot
  bool flagged = false;
};

/// 1/2 (alpha |mu|^2 + |phi|^2 + |grad phi|^2 + 2 int F1(phi) + |sigma|^2) per
/// snapshot. Flags the run when any value exceeds blowup_factor times the
/// initial energy.
EnergyReport energy_diagnostic(const StateTrajectory& traj, const ModelParams& params,
                               const SchemePotential& potential, const Grid& grid,
                               double blowup_factor);

/// Global (min, max) of phi over all snapshots and stages. For singular
/// potentials throws SeparationViolation unless strictly inside the domain.
std::pair<double, double> separation_bounds(const StateTrajectory& traj);

/// Discrete L2(Q) norm of a snapshot series (trapezoid in time).
double series_norm(const Grid& grid, const TimeGrid& time, const FieldSeries& a);
/// L2(Q)^3 distance between two trajectories on the same grids.
double trajectory_distance(const Grid& grid, const StateTrajectory& a, const StateTrajectory& b);

}  // namespace tpf
