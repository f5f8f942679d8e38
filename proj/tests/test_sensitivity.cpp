#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "tumorpf/error.hpp"
#include "tumorpf/sensitivity.hpp"

using namespace tpf;

namespace {

StateTrajectory perturbed(const Problem& pb, const Control& u, const Control& h, double eps) {
  return pb.solve(u + eps * h);
}

}  // namespace

TEST_CASE("linearized solve is linear in the increment") {
  const Problem pb = fixture::small_problem();
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  const Linearization lin(pb, st, u);
  const Control h = fixture::random_control(pb, 1);
  const Control k = fixture::random_control(pb, 2);
  const auto a = lin.linearize(h);
  const auto b = lin.linearize(k);
  const auto c = lin.linearize(2.0 * h + (-3.0) * k);
  for (int n = 0; n <= pb.time.steps; ++n) {
    CHECK((c.xi()[n] - 2.0 * a.xi()[n] + 3.0 * b.xi()[n]).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((c.eta()[n] - 2.0 * a.eta()[n] + 3.0 * b.eta()[n]).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const auto z = lin.linearize(Control::zeros(pb.grid, pb.time));
  CHECK(series_norm(pb.grid, z) == 0.0);
}

TEST_CASE("first-order Taylor remainder is quadratic") {
  const Problem pb = fixture::small_problem();
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  const Linearization lin(pb, st, u);
  const Control h = fixture::random_control(pb, 3, 0.5);
  const auto d = lin.linearize(h);
  double prev = 0.0;
  for (double eps : {1e-1, 5e-2, 2.5e-2}) {
    const double r = state_remainder(pb.grid, perturbed(pb, u, h, eps), st, d, eps);
    if (prev > 0.0) CHECK(std::log2(prev / r) == doctest::Approx(2.0).epsilon(0.1));
    prev = r;
  }
}

TEST_CASE("second-order Taylor remainder is cubic") {
  const Problem pb = fixture::small_problem();
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  const Linearization lin(pb, st, u);
  const Control h = fixture::random_control(pb, 4, 0.5);
  const auto d = lin.linearize(h);
  const auto dd = lin.bilinearize(d, d, h, h);
  double prev = 0.0;
  for (double eps : {2e-1, 1e-1, 5e-2}) {
    const auto sp = perturbed(pb, u, h, eps);
    // |S(u + eps h) - S(u) - eps DS h - eps^2/2 D2S(h, h)|
    double acc = 0.0;
    for (int n = 0; n <= pb.time.steps; ++n) {
      const double tw = pb.time.trapezoid_weight(n);
      const Field a = sp.mu[n] - st.mu[n] - eps * d.eta()[n] - 0.5 * eps * eps * dd.nu()[n];
      const Field b = sp.phi[n] - st.phi[n] - eps * d.xi()[n] - 0.5 * eps * eps * dd.psi()[n];
      const Field c = sp.sigma[n] - st.sigma[n] - eps * d.theta()[n] - 0.5 * eps * eps * dd.rho()[n];
      acc += tw * (inner(pb.grid, a, a) + inner(pb.grid, b, b) + inner(pb.grid, c, c));
    }
    const double r = std::sqrt(pb.time.dt() * acc);
    if (prev > 0.0) CHECK(std::log2(prev / r) == doctest::Approx(3.0).epsilon(0.15));
    prev = r;
  }
}

TEST_CASE("bilinearized solve is symmetric") {
  const Problem pb = fixture::small_problem();
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  const Linearization lin(pb, st, u);
  const Control h = fixture::random_control(pb, 5);
  const Control k = fixture::random_control(pb, 6);
  const auto dh = lin.linearize(h), dk = lin.linearize(k);
  const auto hk = lin.bilinearize(dh, dk, h, k);
  const auto kh = lin.bilinearize(dk, dh, k, h);
  CHECK(series_distance(pb.grid, hk, kh) <= 1e-12 * std::max(1.0, series_norm(pb.grid, hk)));
  CHECK(series_norm(pb.grid, hk) > 0.0);
}

TEST_CASE("generalized system switches") {
  const Problem pb = fixture::small_problem(9, 6);
  const Control u = fixture::smooth_control(pb);
  const auto st = pb.solve(u);
  const Linearization lin(pb, st, u);
  const Control h = fixture::random_control(pb, 7);

  SUBCASE("defaults reproduce the linearization") {
    const auto a = lin.solve(LambdaFlags::linearized(), h, nullptr, nullptr);
    CHECK(series_distance(pb.grid, a, lin.linearize(h)) == 0.0);
  }
  SUBCASE("all switches off gives zero") {
    const auto a = lin.solve({0, 0, 0, 0}, h, nullptr, nullptr);
    CHECK(series_norm(pb.grid, a) == 0.0);
  }
  SUBCASE("solution is affine in sources and initial data") {
    SourceTriple f = SourceTriple::zeros(pb.grid, pb.time);
    for (int n = 0; n < pb.time.steps; ++n) {
      f.f1[n].setConstant(0.2);
      f.f2[n] = pb.grid.constant(-0.1);
      f.f3[n].setConstant(0.05 * n);
    }
    InitialData y0 = pb.init;
    const auto full = lin.solve({1, 1, 1, 1}, h, &f, &y0);
    const auto a = lin.solve({1, 1, 0, 0}, h, nullptr, nullptr);
    const auto b = lin.solve({1, 0, 1, 0}, h, &f, nullptr);
    const auto c = lin.solve({1, 0, 0, 1}, h, nullptr, &y0);
    for (int n = 0; n <= pb.time.steps; ++n)
      CHECK((full.xi()[n] - a.xi()[n] - b.xi()[n] - c.xi()[n]).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("missing data is rejected") {
    CHECK_THROWS_AS(lin.solve({1, 1, 1, 0}, h, nullptr, nullptr), Error);
    CHECK_THROWS_AS(lin.solve({1, 1, 0, 1}, h, nullptr, nullptr), Error);
    CHECK_THROWS_AS(lin.solve({2, 1, 0, 0}, h, nullptr, nullptr), Error);
  }
}
