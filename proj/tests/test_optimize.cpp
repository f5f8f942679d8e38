#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "tumorpf/error.hpp"
#include "tumorpf/optimize.hpp"

using namespace tpf;

TEST_CASE("cost of the target trajectory is the control cost") {
  Problem pb = fixture::small_problem(9, 4);
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  pb.cost.target_Q = st.phi;
  const double J = cost_eval(st, u, pb.cost, pb.grid, pb.time);
  CHECK(J == doctest::Approx(0.5 * pb.cost.b0 * control_inner(pb.grid, pb.time, u, u)));
}

TEST_CASE("second-order form") {
  Problem pb = fixture::small_problem();
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  const Linearization lin(pb, st, u);
  const auto adj = solve_adjoint(lin, pb.cost);
  const SecondOrderForm B(lin, adj);
  const Control h = fixture::random_control(pb, 31);
  const Control k = fixture::random_control(pb, 32);

  SUBCASE("symmetric") {
    const double a = B(h, k), b = B(k, h);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
  SUBCASE("matches differences of the gradient") {
    const double eps = 1e-4;
    const auto gp = reduced_gradient(u + eps * k, pb);
    const auto gm = reduced_gradient(u + (-eps) * k, pb);
    const double fd =
        control_inner(pb.grid, pb.time, gp.grad - gm.grad, h) / (2.0 * eps);
    const double b = B(h, k);
    CHECK(std::abs(fd - b) <= 1e-6 * std::max(1.0, std::abs(b)));
  }
  SUBCASE("reduces to the Tikhonov term without tracking") {
    Problem q = pb;
    q.cost.b1 = 0.0;
    const double v = quadratic_form(u, h, k, q);
    CHECK(v == doctest::Approx(q.cost.b0 * control_inner(q.grid, q.time, h, k)).epsilon(1e-13));
  }
}

TEST_CASE("second-order hypotheses") {
  Problem pb = fixture::small_problem(9, 4);
  const Control u = fixture::smooth_control(pb);
  const Control h = fixture::random_control(pb, 1);
  auto code = [&](const Problem& q) {
    try {
      quadratic_form(u, h, h, q);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  Problem q = pb;
  q.cost.b2 = 1.0;
  CHECK(code(q) == ErrorCode::Hypothesis);
  q = pb;
  q.nonlin.P = Shape::table({-1.0, 1.0}, {0.0, 1.0});
  CHECK(code(q) == ErrorCode::Hypothesis);
  q = pb;
  q.potential = PotentialSpec::obstacle();
  q.solver.yosida_eps = 1e-2;
  CHECK(code(q) == ErrorCode::Hypothesis);
}

TEST_CASE("cone projection") {
  const Problem pb = fixture::small_problem(9, 4);
  const auto box = BoxConstraints::uniform(pb.grid, pb.time, 0.0, 2.0, -1.0, 1.0);
  Control u = Control::constant(pb.grid, pb.time, 1.0, 0.0);
  u.u1[0][0] = 0.0;
  u.u1[0][1] = 2.0;
  GradientField g;
  g.d = Control::zeros(pb.grid, pb.time);
  g.grad = Control::zeros(pb.grid, pb.time);
  g.grad.u2[1][3] = 5.0;
  const auto sets = strongly_active_sets(g, 1.0);
  CHECK(sets.count() == 1);
  const Control h = Control::constant(pb.grid, pb.time, -1.0, 1.0);
  const Control c = cone_project(h, u, box, sets, 1e-12);
  CHECK(c.u1[0][0] == 0.0);   // at the lower bound: h >= 0
  CHECK(c.u1[0][1] == -1.0);  // at the upper bound: h <= 0 already
  CHECK(c.u2[1][3] == 0.0);   // strongly active
  CHECK(c.u2[1][4] == 1.0);
  const Control cc = cone_project(c, u, box, sets, 1e-12);
  CHECK(control_sup_norm(cc - c) == 0.0);
}

TEST_CASE("projected gradient on an unconstrained problem") {
  Problem pb = fixture::small_problem(9, 6);
  const auto box = BoxConstraints::uniform(pb.grid, pb.time, -50.0, 50.0, -50.0, 50.0);
  PgdOptions opt;
  opt.tol = 1e-9;
  const auto res = projected_gradient(Control::zeros(pb.grid, pb.time), pb, box, opt);
  CHECK(res.converged);
  for (std::size_t i = 1; i < res.history.size(); ++i)
    CHECK(res.history[i].J <= res.history[i - 1].J);
  CHECK(control_norm(pb.grid, pb.time, res.at_u.gradient.grad) <= 1e-9);
}

TEST_CASE("projected gradient with active bounds satisfies the projection formula") {
  Problem pb = fixture::small_problem(9, 6);
  pb.cost.b0 = 0.01;
  const auto box = BoxConstraints::uniform(pb.grid, pb.time, 0.0, 0.5, -0.2, 0.2);
  PgdOptions opt;
  opt.tol = 1e-10;
  opt.max_iter = 2000;
  const auto res = projected_gradient(Control::zeros(pb.grid, pb.time), pb, box, opt);
  REQUIRE(res.converged);
  const auto fp = projection_residual(res.u, res.at_u.gradient, pb.cost.b0, box, pb.grid, pb.time);
  CHECK(fp.sup <= 1e-6);
  const auto sets = strongly_active_sets(res.at_u.gradient, default_tau(res.at_u.gradient));
  CHECK(sets.count() > 0);
}

TEST_CASE("sampled second-order check is reproducible and agrees with the spectrum") {
  Problem pb = fixture::small_problem(7, 4);
  const Control u = fixture::smooth_control(pb, 0.5, 0.1);
  const auto box = BoxConstraints::uniform(pb.grid, pb.time, -10.0, 10.0, -10.0, 10.0);
  SscOptions opt;
  opt.n_samples = 16;
  opt.seed = 42;
  opt.tau = 1e6;  // not a stationary point: keep every coordinate free
  const auto a = ssc_certificate(u, pb, box, opt);
  const auto b = ssc_certificate(u, pb, box, opt);
  CHECK(a.min_rayleigh == b.min_rayleigh);
  CHECK(a.used_samples == 16);
  const auto g = reduced_gradient(u, pb);
  const auto sets = strongly_active_sets(g, a.tau);
  const auto spec = dense_hessian_spectrum(u, pb, sets);
  CHECK(spec.unknowns == 2 * 4 * 7);
  CHECK(spec.free_unknowns == spec.unknowns);
  CHECK(a.min_rayleigh >= spec.min_free - 1e-10);
  CHECK(spec.min_all == doctest::Approx(spec.min_free));
}

TEST_CASE("trivial cone is reported") {
  Problem pb = fixture::small_problem(5, 2);
  const Control u = fixture::smooth_control(pb);
  const auto box = BoxConstraints::uniform(pb.grid, pb.time, -10.0, 10.0, -10.0, 10.0);
  SscOptions opt;
  opt.tau = 1e-300;
  opt.n_samples = 4;
  pb.cost.b0 = 1.0;
  // Every gradient entry is strongly active with a tiny tau unless it is exactly zero.
  try {
    ssc_certificate(u, pb, box, opt);
    FAIL("expected ConeTrivial");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConeTrivial);
  }
}
