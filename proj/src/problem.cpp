#include "tumorpf/problem.hpp"

#include "tumorpf/error.hpp"

namespace tpf {

Problem::Problem(Grid g, TimeGrid t)
    : grid(std::move(g)),
      time(t),
      init(InitialData::zeros(grid)),
      cost(CostSpec::zero_targets(grid, time, 1.0, 0.0, 0.0)) {}

void Problem::validate() const {
  params.validate();
  potential.validate();
  init.check(grid, potential);
  cost.check(grid, time);
  require(solver.stages >= 1 && solver.stages <= 3, ErrorCode::InvalidArgument,
          "solver.stages must be 1, 2 or 3");
  require(solver.nonlinear_tol > 0.0, ErrorCode::InvalidArgument,
          "solver.nonlinear_tol must be positive");
  require(solver.max_newton >= 1 && solver.max_backtracks >= 0 && solver.max_retries >= 0,
          ErrorCode::InvalidArgument, "solver iteration limits must be nonnegative");
  require(solver.sep_margin >= 0.0, ErrorCode::InvalidArgument, "solver.sep_margin must be >= 0");
  require(solver.yosida_eps >= 0.0, ErrorCode::InvalidArgument, "solver.yosida_eps must be >= 0");
  require(potential.kind != PotentialKind::Obstacle || solver.yosida_eps > 0.0,
          ErrorCode::InvalidArgument, "the obstacle potential requires solver.yosida_eps > 0");
}

}  // namespace tpf
