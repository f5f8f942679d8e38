#include "doctest.h"

#include <cmath>
#include <numbers>

#include "tumorpf/error.hpp"
#include "tumorpf/state.hpp"

using namespace tpf;

namespace {

struct Setup {
  Grid grid = Grid::build(1, {33}, {2.0});
  TimeGrid time = TimeGrid::make(0.5, 40);
  ModelParams params{0.5, 0.5, 0.3};
  NonlinearitySpec nonlin{Shape::bump(1.0, 0.0, 0.8), Shape::ramp()};
  SolverOptions options;
};

InitialData smooth_initial(const Grid& g, double amp) {
  InitialData d = InitialData::zeros(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(i, 0) / g.lengths()[0];
    d.phi0[i] = amp * std::cos(std::numbers::pi * x);
    d.sigma0[i] = 0.5 + 0.2 * std::sin(2.0 * x);
    d.mu0[i] = 0.1 * x;
  }
  return d;
}

Control wavy_control(const Grid& g, const TimeGrid& tg) {
  Control u = Control::zeros(g, tg);
  for (int n = 0; n < tg.steps; ++n)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.coordinate(i, 0), t = tg.time(n + 1);
      u.u1[n][i] = 1.0 + 0.5 * std::sin(x + t);
      u.u2[n][i] = 0.3 * std::cos(2.0 * x - t);
    }
  return u;
}

}  // namespace

TEST_CASE("zero data is an exact fixed point") {
  Setup s;
  s.nonlin.P = Shape::constant(0.0);
  const auto traj = solve_state(s.params, PotentialSpec::regular(), s.nonlin,
                                Control::zeros(s.grid, s.time), InitialData::zeros(s.grid), s.grid,
                                s.time, s.options);
  for (int n = 0; n <= s.time.steps; ++n) {
    CHECK(traj.mu[n].cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.phi[n].cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.sigma[n].cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.diagnostics[n].energy == 0.0);
    CHECK(traj.diagnostics[n].mass_residual == 0.0);
  }
  const auto bounds = separation_bounds(traj);
  CHECK(bounds.first == 0.0);
  CHECK(bounds.second == 0.0);
}

TEST_CASE("nutrient grows linearly under constant supply") {
  Setup s;
  s.nonlin.P = Shape::constant(0.0);
  InitialData init = InitialData::zeros(s.grid);
  init.sigma0 = s.grid.constant(0.7);
  const double c = 0.8;
  const Control u = Control::constant(s.grid, s.time, 0.0, c);
  for (int stages : {1, 2, 3}) {
    s.options.stages = stages;
    const auto traj =
        solve_state(s.params, PotentialSpec::regular(), s.nonlin, u, init, s.grid, s.time, s.options);
    for (int n = 0; n <= s.time.steps; ++n)
      CHECK(std::abs(traj.sigma[n][5] - (0.7 + c * s.time.time(n))) <= 1e-12);
    const double m0 = (s.grid.weights().array() *
                       (s.params.alpha * traj.mu[0].array() + traj.phi[0].array() + traj.sigma[0].array()))
                          .sum();
    const int N = s.time.steps;
    const double mN = (s.grid.weights().array() *
                       (s.params.alpha * traj.mu[N].array() + traj.phi[N].array() + traj.sigma[N].array()))
                          .sum();
    CHECK(mN - m0 == doctest::Approx(c * s.grid.measure() * s.time.T).epsilon(1e-12));
  }
}

TEST_CASE("mass identity on nonlinear runs") {
  Setup s;
  for (const auto& pot : {PotentialSpec::regular(), PotentialSpec::logarithmic(2.0)}) {
    for (int stages : {1, 2, 3}) {
      s.options.stages = stages;
      const auto traj = solve_state(s.params, pot, s.nonlin, wavy_control(s.grid, s.time),
                                    smooth_initial(s.grid, 0.6), s.grid, s.time, s.options);
      const auto res =
          mass_balance_residual(traj, wavy_control(s.grid, s.time), s.params, s.nonlin, s.grid, s.time);
      REQUIRE(res.size() == static_cast<std::size_t>(s.time.steps));
      for (double r : res) CHECK(r <= 1e-10);
      CHECK(!traj.energy_flag);
    }
  }
}

TEST_CASE("separation for the logarithmic potential") {
  Setup s;
  const auto traj = solve_state(s.params, PotentialSpec::logarithmic(2.0), s.nonlin,
                                wavy_control(s.grid, s.time), smooth_initial(s.grid, 0.9), s.grid,
                                s.time, s.options);
  const auto [lo, hi] = separation_bounds(traj);
  CHECK(lo > -1.0);
  CHECK(hi < 1.0);
  CHECK(traj.diagnostics.back().phi_max <= hi);

  InitialData bad = smooth_initial(s.grid, 1.0);
  CHECK_THROWS_AS(solve_state(s.params, PotentialSpec::logarithmic(2.0), s.nonlin,
                              wavy_control(s.grid, s.time), bad, s.grid, s.time, s.options),
                  SeparationViolation);
}

TEST_CASE("regular potential: separation bounds never assert") {
  Setup s;
  const auto traj = solve_state(s.params, PotentialSpec::regular(), s.nonlin,
                                wavy_control(s.grid, s.time), smooth_initial(s.grid, 1.5), s.grid,
                                s.time, s.options);
  CHECK_NOTHROW(separation_bounds(traj));
}

TEST_CASE("obstacle runs through its Yosida level only") {
  Setup s;
  CHECK_THROWS_AS(solve_state(s.params, PotentialSpec::obstacle(), s.nonlin,
                              Control::zeros(s.grid, s.time), smooth_initial(s.grid, 0.5), s.grid,
                              s.time, s.options),
                  Error);
  s.options.yosida_eps = 1e-2;
  const auto traj = solve_state(s.params, PotentialSpec::obstacle(), s.nonlin,
                                Control::zeros(s.grid, s.time), smooth_initial(s.grid, 0.5), s.grid,
                                s.time, s.options);
  CHECK(traj.phi.back().allFinite());
}

TEST_CASE("energy diagnostic flags a constructed blow-up") {
  Setup s;
  s.nonlin.P = Shape::constant(0.0);
  const TimeGrid huge = TimeGrid::make(1e2, 2);
  InitialData init = InitialData::zeros(s.grid);
  init.sigma0 = s.grid.constant(0.1);
  const auto traj = solve_state(s.params, PotentialSpec::regular(), s.nonlin,
                                Control::constant(s.grid, huge, 0.0, 10.0), init, s.grid, huge,
                                s.options);
  CHECK(traj.energy_flag);
}

TEST_CASE("continuous dependence ratio is finite") {
  Setup s;
  const Control a = wavy_control(s.grid, s.time);
  const Control b = a + Control::constant(s.grid, s.time, 0.1, -0.05);
  const auto init = smooth_initial(s.grid, 0.5);
  const auto ta = solve_state(s.params, PotentialSpec::regular(), s.nonlin, a, init, s.grid, s.time, s.options);
  const auto tb = solve_state(s.params, PotentialSpec::regular(), s.nonlin, b, init, s.grid, s.time, s.options);
  const double ratio = trajectory_distance(s.grid, ta, tb) / control_norm(s.grid, s.time, a - b);
  CHECK(std::isfinite(ratio));
  CHECK(ratio > 0.0);
  CHECK(trajectory_distance(s.grid, ta, ta) == 0.0);
}
