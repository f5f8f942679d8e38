#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "tumorpf/problem.hpp"

namespace fixture {

using namespace tpf;

/// Small smooth problem: logarithmic potential, bump P, ramp h, tracking of
/// a travelling front.
inline Problem small_problem(int nodes = 17, int steps = 12, double T = 0.3) {
  Problem pb(Grid::build(1, {nodes}, {2.0}), TimeGrid::make(T, steps));
  pb.params = {0.5, 0.5, 0.3};
  pb.potential = PotentialSpec::logarithmic(2.0);
  pb.nonlin = {Shape::bump(1.0, 0.0, 0.8), Shape::ramp()};
  const Grid& g = pb.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(i, 0) / g.lengths()[0];
    pb.init.phi0[i] = 0.6 * std::cos(std::numbers::pi * x);
    pb.init.sigma0[i] = 0.5 + 0.2 * std::sin(2.0 * x);
    pb.init.mu0[i] = 0.1 * x;
  }
  pb.cost = CostSpec::zero_targets(g, pb.time, 0.1, 1.0, 0.0);
  for (int n = 0; n <= pb.time.steps; ++n)
    for (std::size_t i = 0; i < g.size(); ++i)
      pb.cost.target_Q[n][i] = 0.5 * std::tanh(4.0 * (g.coordinate(i, 0) - 1.0 + pb.time.time(n)));
  return pb;
}

inline Control smooth_control(const Problem& pb, double a1 = 1.0, double a2 = 0.3) {
  Control u = Control::zeros(pb.grid, pb.time);
  for (int n = 0; n < pb.time.steps; ++n)
    for (std::size_t i = 0; i < pb.grid.size(); ++i) {
      const double x = pb.grid.coordinate(i, 0), t = pb.time.time(n + 1);
      u.u1[n][i] = a1 * (1.0 + 0.5 * std::sin(x + t));
      u.u2[n][i] = a2 * std::cos(2.0 * x - t);
    }
  return u;
}

inline Control random_control(const Problem& pb, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-scale, scale);
  Control u = Control::zeros(pb.grid, pb.time);
  for (int n = 0; n < pb.time.steps; ++n) {
    for (auto& v : u.u1[n]) v = U(rng);
    for (auto& v : u.u2[n]) v = U(rng);
  }
  return u;
}

}  // namespace fixture
