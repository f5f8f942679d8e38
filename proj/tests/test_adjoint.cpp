#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "tumorpf/adjoint.hpp"
#include "tumorpf/optimize.hpp"

using namespace tpf;

TEST_CASE("discrete duality holds to round-off") {
  Problem pb = fixture::small_problem();
  const Control u = fixture::smooth_control(pb);
  for (double b2 : {0.0, 0.7}) {
    pb.cost.b2 = b2;
    for (int n = 0; n < static_cast<int>(pb.grid.size()); ++n)
      pb.cost.target_Omega[n] = 0.1 * n / pb.grid.size();
    for (int stages : {1, 2, 3}) {
      pb.solver.stages = stages;
      const auto st = pb.solve(u);
      const Linearization lin(pb, st, u);
      const auto adj = solve_adjoint(lin, pb.cost);
      for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto d = duality_sides(lin, adj, pb.cost, fixture::random_control(pb, seed));
        CHECK(d.relative_residual() <= 1e-10);
        CHECK(std::abs(d.lhs) > 1e-8);
      }
    }
  }
}

TEST_CASE("terminal values") {
  Problem pb = fixture::small_problem(9, 4);
  pb.cost.b2 = 2.0;
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  const auto adj = solve_adjoint(pb, st, u, pb.cost);
  const int N = pb.time.steps;
  CHECK(adj.p[N].cwiseAbs().maxCoeff() == 0.0);
  CHECK(adj.r[N].cwiseAbs().maxCoeff() == 0.0);
  const Field expect = (2.0 / pb.params.beta) * (st.phi[N] - pb.cost.target_Omega);
  CHECK((adj.q[N] - expect).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("zero tracking gives a zero adjoint") {
  Problem pb = fixture::small_problem(9, 4);
  pb.cost.b1 = 0.0;
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  const auto adj = solve_adjoint(pb, st, u, pb.cost);
  for (int n = 0; n <= pb.time.steps; ++n) {
    CHECK(adj.p[n].cwiseAbs().maxCoeff() == 0.0);
    CHECK(adj.q[n].cwiseAbs().maxCoeff() == 0.0);
    CHECK(adj.r[n].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("adjoint gradient matches central differences of the cost") {
  Problem pb = fixture::small_problem();
  pb.cost.b2 = 0.5;
  const Control u = fixture::smooth_control(pb);
  const auto g = reduced_gradient(u, pb);
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const Control h = fixture::random_control(pb, seed);
    const double eps = 1e-4;
    const double fd =
        (reduced_cost(u + eps * h, pb) - reduced_cost(u + (-eps) * h, pb)) / (2.0 * eps);
    const double ad = control_inner(pb.grid, pb.time, g.grad, h);
    CHECK(std::abs(fd - ad) <= 1e-7 * std::max(1.0, std::abs(ad)));
  }
}
