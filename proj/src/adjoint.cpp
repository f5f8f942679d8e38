#include "tumorpf/adjoint.hpp"

#include <algorithm>
#include <cmath>

#include "linearization.hpp"
#include "tumorpf/error.hpp"

namespace tpf {

namespace {
using Eigen::Index;
}  // namespace

Field AdjointTrajectory::stage_field(int step, int stage, int comp) const {
  const Eigen::VectorXd& Z = stages.at(static_cast<std::size_t>(step - 1));
  const Index m = Z.size() / (3 * stage_count);
  Field f(m);
  for (Index i = 0; i < m; ++i) f[i] = Z[(i * stage_count + stage) * 3 + comp];
  return f;
}

AdjointTrajectory solve_adjoint(const Linearization& lin, const CostSpec& cost) {
  const auto& m = lin.impl();
  const Problem& pb = m.problem;
  const auto& sys = m.sys;
  const StateTrajectory& st = m.state;
  const Grid& grid = pb.grid;
  const int N = pb.time.steps;
  const int s = sys.stages();
  const Index M = sys.nodes();
  const double dt = pb.time.dt();
  const Field& w = grid.weights();
  const auto& a = m.tableau.a;
  const auto& b = m.tableau.b;
  cost.check(grid, pb.time);

  AdjointTrajectory out;
  out.time = pb.time;
  out.stage_count = s;
  out.p.assign(N + 1, grid.zeros());
  out.q.assign(N + 1, grid.zeros());
  out.r.assign(N + 1, grid.zeros());
  out.stages.assign(N, Eigen::VectorXd());

  // Terminal values (adj5): alpha p(T) = 0, r(T) = 0, (p + beta q)(T) = b2 (phi(T) - target).
  if (cost.b2 != 0.0)
    out.q[N] = (cost.b2 / pb.params.beta) * (st.phi[N] - cost.target_Omega);

  // c = W (p, q, r) at the current level, interleaved.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(3 * M);
  for (Index i = 0; i < M; ++i) c[3 * i + 1] = w[i] * out.q[N][i];

  Eigen::VectorXd rhs(sys.size());
  for (int n = N; n >= 1; --n) {
    rhs.setZero();
    const Eigen::VectorXd Mc = sys.mass_transpose_apply(c);
    const double g = cost.b1 * pb.time.trapezoid_weight(n) * dt;
    for (Index i = 0; i < M; ++i) {
      double* e = rhs.data() + sys.index(i, s - 1, 0);
      e[0] = Mc[3 * i];
      e[1] = Mc[3 * i + 1];
      e[2] = Mc[3 * i + 2];
      if (g != 0.0) e[1] += g * w[i] * (st.phi[n][i] - cost.target_Q[n][i]);
    }
    const Eigen::VectorXd L = m.solve(n, rhs, true, true);

    Eigen::VectorXd& rho = out.stages[n - 1];
    rho.resize(sys.size());
    c.setZero();
    for (Index i = 0; i < M; ++i) {
      for (int j = 0; j < s; ++j) {
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        for (int k = 0; k < s; ++k) acc += a(k, j) * L.segment<3>(sys.index(i, k, 0));
        rho.segment<3>(sys.index(i, j, 0)) = acc / (b[j] * w[i]);
        c.segment<3>(3 * i) += L.segment<3>(sys.index(i, j, 0));
      }
      out.p[n - 1][i] = c[3 * i] / w[i];
      out.q[n - 1][i] = c[3 * i + 1] / w[i];
      out.r[n - 1][i] = c[3 * i + 2] / w[i];
    }
  }
  return out;
}

AdjointTrajectory solve_adjoint(const Problem& problem, const StateTrajectory& state,
                                const Control& ubar, const CostSpec& cost) {
  return solve_adjoint(Linearization(problem, state, ubar), cost);
}

double DualityPair::relative_residual() const noexcept {
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

DualityPair duality_sides(const Linearization& lin, const AdjointTrajectory& adj,
                          const CostSpec& cost, const Control& h) {
  const Problem& pb = lin.problem();
  const StateTrajectory& st = lin.state();
  const Grid& grid = pb.grid;
  const TimeGrid& tg = pb.time;
  const RadauTableau tab = RadauTableau::make(adj.stage_count);
  h.check(grid, tg, "duality increment");

  DualityPair d;
  for (int n = 1; n <= tg.steps; ++n) {
    for (int j = 0; j < adj.stage_count; ++j) {
      const Field phi = st.stage_field(n, j, 1);
      const Field p = adj.stage_field(n, j, 0);
      const Field r = adj.stage_field(n, j, 2);
      Field hv(phi.size());
      for (Index i = 0; i < phi.size(); ++i) hv[i] = pb.nonlin.h.eval(phi[i], 0);
      d.lhs += tab.b[j] * (-inner(grid, hv.cwiseProduct(h.u1[n - 1]), p) + inner(grid, h.u2[n - 1], r));
    }
  }
  d.lhs *= tg.dt();

  const LinearizedTrajectory lh = lin.linearize(h);
  for (int n = 0; n <= tg.steps; ++n)
    d.rhs += cost.b1 * tg.trapezoid_weight(n) * tg.dt() *
             inner(grid, st.phi[n] - cost.target_Q[n], lh.xi()[n]);
  d.rhs += cost.b2 * inner(grid, st.phi[tg.steps] - cost.target_Omega, lh.xi()[tg.steps]);
  return d;
}

}  // namespace tpf
