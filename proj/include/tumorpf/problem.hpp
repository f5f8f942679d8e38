#pragma once

#include "tumorpf/grid.hpp"
#include "tumorpf/model.hpp"
#include "tumorpf/state.hpp"
#include "tumorpf/time_scheme.hpp"

namespace tpf {

/// Everything that defines the control problem except the control itself.
struct Problem {
  Grid grid;
  TimeGrid time;
  ModelParams params;
  PotentialSpec potential;
  NonlinearitySpec nonlin;
  InitialData init;
  CostSpec cost;
  SolverOptions solver;

  Problem(Grid g, TimeGrid t);

  /// Checks every block for consistency with the grids.
  void validate() const;

  StateTrajectory solve(const Control& u) const {
    return solve_state(params, potential, nonlin, u, init, grid, time, solver);
  }
};

}  // namespace tpf
