#include "tumorpf/sensitivity.hpp"

#include <cmath>
#include <string>

#include "linearization.hpp"
#include "tumorpf/error.hpp"

namespace tpf {

namespace {

using Eigen::Index;

// Systems up to this many unknowns per step keep all step factorizations.
constexpr Index kCacheLimit = 4000;

void push_snapshot(SensitivitySeries& out, const Eigen::VectorXd& y) {
  out.c0.push_back(detail::component(y, 0));
  out.c1.push_back(detail::component(y, 1));
  out.c2.push_back(detail::component(y, 2));
}

double series_sq(const Grid& grid, const SensitivitySeries& s, const SensitivitySeries* b) {
  double acc = 0.0;
  for (int n = 0; n <= s.steps(); ++n) {
    const double tw = s.time.trapezoid_weight(n);
    for (FieldSeries SensitivitySeries::*comp :
         {&SensitivitySeries::c0, &SensitivitySeries::c1, &SensitivitySeries::c2}) {
      const Field d = b ? Field((s.*comp)[n] - (b->*comp)[n]) : (s.*comp)[n];
      acc += tw * inner(grid, d, d);
    }
  }
  return s.time.dt() * acc;
}

}  // namespace

void LambdaFlags::validate() const {
  for (int v : {l1, l2, l3, l4})
    require(v == 0 || v == 1, ErrorCode::InvalidArgument, "lambda flags must be 0 or 1");
}

SourceTriple SourceTriple::zeros(const Grid& grid, const TimeGrid& time) {
  SourceTriple f;
  f.f1.assign(time.steps, grid.zeros());
  f.f2.assign(time.steps, grid.zeros());
  f.f3.assign(time.steps, grid.zeros());
  return f;
}

void SourceTriple::check(const Grid& grid, const TimeGrid& time) const {
  for (const auto* s : {&f1, &f2, &f3}) {
    require(static_cast<int>(s->size()) == time.steps, ErrorCode::InvalidArgument,
            "sources need one field per control level");
    for (const auto& f : *s) grid.check(f, "source field");
  }
}

Field SensitivitySeries::stage_field(int step, int stage, int comp) const {
  const Eigen::VectorXd& Z = stages.at(static_cast<std::size_t>(step - 1));
  const Index m = Z.size() / (3 * stage_count);
  Field f(m);
  for (Index i = 0; i < m; ++i) f[i] = Z[(i * stage_count + stage) * 3 + comp];
  return f;
}

// ---------------------------------------------------------------------------

Linearization::Impl::Impl(const Problem& p, const StateTrajectory& s, const Control& u)
    : problem(p),
      state(s),
      ubar(u),
      potential(p.potential, p.solver.yosida_eps),
      tableau(RadauTableau::make(p.solver.stages)),
      sys(p.grid, p.params, potential, p.nonlin, tableau, p.time.dt()),
      cache_factors(sys.size() <= kCacheLimit) {
  u.check(p.grid, p.time, "linearization control");
  require(s.steps() == p.time.steps && s.stage_count == tableau.stages &&
              static_cast<int>(s.stages.size()) == p.time.steps,
          ErrorCode::InvalidArgument,
          "linearization: state trajectory does not match the problem's time grid or scheme");
  base_ = factorize(sys.jacobian(s.stages[0], u.u1[0], false), 0);
  if (cache_factors) {
    coupled_.reserve(p.time.steps);
    for (int n = 1; n <= p.time.steps; ++n)
      coupled_.push_back(factorize(sys.jacobian(s.stages[n - 1], u.u1[n - 1], true), n));
  }
}

std::unique_ptr<Linearization::Impl::Lu> Linearization::Impl::factorize(
    const Eigen::SparseMatrix<double>& A, int step) const {
  auto lu = std::make_unique<Lu>();
  lu->compute(A);
  if (lu->info() != Eigen::Success)
    fail(ErrorCode::SingularMatrix, "singular linearized step matrix in step " + std::to_string(step));
  return lu;
}

Eigen::VectorXd Linearization::Impl::solve(int step, const Eigen::VectorXd& rhs, bool coupled,
                                           bool transpose) const {
  std::unique_ptr<Lu> scratch;
  const Lu* lu = base_.get();
  if (coupled) {
    if (cache_factors) {
      lu = coupled_[static_cast<std::size_t>(step - 1)].get();
    } else {
      scratch = factorize(
          sys.jacobian(state.stages[static_cast<std::size_t>(step - 1)], ubar.u1[step - 1], true),
          step);
      lu = scratch.get();
    }
  }
  // The transpose view only reads the factors; Eigen lacks a const overload.
  Eigen::VectorXd x = transpose ? Eigen::VectorXd(const_cast<Lu*>(lu)->transpose().solve(rhs))
                                : Eigen::VectorXd(lu->solve(rhs));
  if (!x.allFinite())
    fail(ErrorCode::SingularMatrix, "non-finite linearized solve in step " + std::to_string(step));
  return x;
}

Linearization::Linearization(const Problem& problem, const StateTrajectory& state,
                             const Control& ubar)
    : impl_(std::make_unique<Impl>(problem, state, ubar)) {}

Linearization::~Linearization() = default;

const Problem& Linearization::problem() const noexcept { return impl_->problem; }
const StateTrajectory& Linearization::state() const noexcept { return impl_->state; }
const Control& Linearization::control() const noexcept { return impl_->ubar; }

LinearizedTrajectory Linearization::solve(const LambdaFlags& flags, const Control& h,
                                          const SourceTriple* f, const InitialData* init) const {
  flags.validate();
  const Impl& m = *impl_;
  const Problem& p = m.problem;
  const auto& sys = m.sys;
  const int s = sys.stages();
  const Index M = sys.nodes();
  if (flags.l2) h.check(p.grid, p.time, "linearized increment");
  require(!flags.l3 || f, ErrorCode::InvalidArgument, "l3 = 1 needs source fields");
  require(!flags.l4 || init, ErrorCode::InvalidArgument, "l4 = 1 needs initial data");
  if (flags.l3) f->check(p.grid, p.time);
  if (flags.l4) {
    p.grid.check(init->mu0, "initial mu0");
    p.grid.check(init->phi0, "initial phi0");
    p.grid.check(init->sigma0, "initial sigma0");
  }

  LinearizedTrajectory out;
  out.time = p.time;
  out.stage_count = s;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3 * M);
  if (flags.l4) y = detail::interleave(init->mu0, init->phi0, init->sigma0);
  push_snapshot(out, y);

  Eigen::VectorXd src(sys.size());
  for (int n = 1; n <= p.time.steps; ++n) {
    src.setZero();
    for (int j = 0; j < s; ++j) {
      Field hphi;
      if (flags.l2) hphi = m.state.stage_field(n, j, 1);
      for (Index i = 0; i < M; ++i) {
        double* e = src.data() + sys.index(i, j, 0);
        if (flags.l2) {
          e[0] -= p.nonlin.h.eval(hphi[i], 0) * h.u1[n - 1][i];
          e[2] += h.u2[n - 1][i];
        }
        if (flags.l3) {
          e[0] += f->f1[n - 1][i];
          e[1] += f->f2[n - 1][i];
          e[2] += f->f3[n - 1][i];
        }
      }
    }
    const Eigen::VectorXd Z = m.solve(n, sys.stage_rhs(y, src), flags.l1 == 1, false);
    y = sys.last_stage(Z);
    out.stages.push_back(Z);
    push_snapshot(out, y);
  }
  return out;
}

LinearizedTrajectory Linearization::linearize(const Control& h) const {
  return solve(LambdaFlags::linearized(), h, nullptr, nullptr);
}

BilinearizedTrajectory Linearization::bilinearize(const LinearizedTrajectory& lh,
                                                  const LinearizedTrajectory& lk, const Control& h,
                                                  const Control& k) const {
  const Impl& m = *impl_;
  const Problem& p = m.problem;
  const auto& sys = m.sys;
  const int s = sys.stages();
  const Index M = sys.nodes();
  const double chi = p.params.chi;
  h.check(p.grid, p.time, "bilinearized increment h");
  k.check(p.grid, p.time, "bilinearized increment k");
  require(lh.steps() == p.time.steps && lk.steps() == p.time.steps && lh.stage_count == s &&
              lk.stage_count == s,
          ErrorCode::InvalidArgument, "bilinearized: linearized inputs do not match the problem");

  BilinearizedTrajectory out;
  out.time = p.time;
  out.stage_count = s;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3 * M);
  push_snapshot(out, y);

  // Second derivative of f at each stage in the directions (lin_h, h) and
  // (lin_k, k):
  //   f_mu''    =  X - H,   f_phi'' = -F'''(phi) xi_h xi_k,   f_sigma'' = -X,
  //   X = P'' E xi_h xi_k + P' xi_k (theta_h - chi xi_h - eta_h)
  //                       + P' xi_h (theta_k - chi xi_k - eta_k),
  //   H = h'' u1 xi_h xi_k + h' (xi_h k1 + xi_k h1).
  Eigen::VectorXd src(sys.size());
  for (int n = 1; n <= p.time.steps; ++n) {
    const Eigen::VectorXd& Zh = lh.stages[n - 1];
    const Eigen::VectorXd& Zk = lk.stages[n - 1];
    const Field& u1 = m.ubar.u1[n - 1];
    const Field& h1 = h.u1[n - 1];
    const Field& k1 = k.u1[n - 1];
    for (int j = 0; j < s; ++j) {
      const detail::StageCoefficients c = m.coefficients(n, j);
      for (Index i = 0; i < M; ++i) {
        const Index b = sys.index(i, j, 0);
        const double eh = Zh[b], xh = Zh[b + 1], th = Zh[b + 2];
        const double ek = Zk[b], xk = Zk[b + 1], tk = Zk[b + 2];
        const double X = c.ddP[i] * c.E[i] * xh * xk + c.dP[i] * xk * (th - chi * xh - eh) +
                         c.dP[i] * xh * (tk - chi * xk - ek);
        const double H = c.ddh[i] * u1[i] * xh * xk + c.dh[i] * (xh * k1[i] + xk * h1[i]);
        src[b] = X - H;
        src[b + 1] = -c.dF3[i] * xh * xk;
        src[b + 2] = -X;
      }
    }
    const Eigen::VectorXd Z = m.solve(n, sys.stage_rhs(y, src), true, false);
    y = sys.last_stage(Z);
    out.stages.push_back(Z);
    push_snapshot(out, y);
  }
  return out;
}

LinearizedTrajectory solve_generalized_linear(const Problem& problem, const StateTrajectory& state,
                                              const Control& ubar, const LambdaFlags& flags,
                                              const Control& h, const SourceTriple* f,
                                              const InitialData* init) {
  return Linearization(problem, state, ubar).solve(flags, h, f, init);
}

BilinearizedTrajectory solve_bilinearized(const Problem& problem, const StateTrajectory& state,
                                          const Control& ubar, const LinearizedTrajectory& lin_h,
                                          const LinearizedTrajectory& lin_k, const Control& h,
                                          const Control& k) {
  return Linearization(problem, state, ubar).bilinearize(lin_h, lin_k, h, k);
}

double series_norm(const Grid& grid, const SensitivitySeries& s) {
  return std::sqrt(series_sq(grid, s, nullptr));
}

double series_distance(const Grid& grid, const SensitivitySeries& a, const SensitivitySeries& b) {
  require(a.steps() == b.steps(), ErrorCode::InvalidArgument, "series_distance: step counts differ");
  return std::sqrt(series_sq(grid, a, &b));
}

double state_remainder(const Grid& grid, const StateTrajectory& a, const StateTrajectory& b,
                       const SensitivitySeries& d, double eps) {
  require(a.steps() == b.steps() && a.steps() == d.steps(), ErrorCode::InvalidArgument,
          "state_remainder: step counts differ");
  double acc = 0.0;
  for (int n = 0; n <= a.steps(); ++n) {
    const Field r0 = a.mu[n] - b.mu[n] - eps * d.c0[n];
    const Field r1 = a.phi[n] - b.phi[n] - eps * d.c1[n];
    const Field r2 = a.sigma[n] - b.sigma[n] - eps * d.c2[n];
    acc += a.time.trapezoid_weight(n) * (inner(grid, r0, r0) + inner(grid, r1, r1) + inner(grid, r2, r2));
  }
  return std::sqrt(a.time.dt() * acc);
}

}  // namespace tpf
