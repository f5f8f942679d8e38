#include "tumorpf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "linearization.hpp"
#include "tumorpf/error.hpp"

namespace tpf {

namespace {

using Eigen::Index;

Field eval_h(const Shape& h, const Field& phi) {
  Field out(phi.size());
  for (Index i = 0; i < phi.size(); ++i) out[i] = h.eval(phi[i], 0);
  return out;
}

}  // namespace

double cost_eval(const StateTrajectory& state, const Control& u, const CostSpec& cost,
                 const Grid& grid, const TimeGrid& time) {
  cost.check(grid, time);
  u.check(grid, time, "cost_eval");
  require(state.steps() == time.steps, ErrorCode::InvalidArgument,
          "cost_eval: trajectory and time grid differ");
  double track = 0.0;
  if (cost.b1 != 0.0) {
    for (int n = 0; n <= time.steps; ++n) {
      const Field e = state.phi[n] - cost.target_Q[n];
      track += time.trapezoid_weight(n) * inner(grid, e, e);
    }
    track *= 0.5 * cost.b1 * time.dt();
  }
  double terminal = 0.0;
  if (cost.b2 != 0.0) {
    const Field e = state.phi[time.steps] - cost.target_Omega;
    terminal = 0.5 * cost.b2 * inner(grid, e, e);
  }
  const double control = 0.5 * cost.b0 * control_inner(grid, time, u, u);
  return track + terminal + control;
}

GradientField gradient_from_adjoint(const Linearization& lin, const AdjointTrajectory& adj,
                                    const Control& ubar, double b0) {
  const Problem& pb = lin.problem();
  const StateTrajectory& st = lin.state();
  const RadauTableau tab = RadauTableau::make(adj.stage_count);
  GradientField g;
  g.d = Control::zeros(pb.grid, pb.time);
  for (int n = 1; n <= pb.time.steps; ++n) {
    for (int j = 0; j < adj.stage_count; ++j) {
      const Field hv = eval_h(pb.nonlin.h, st.stage_field(n, j, 1));
      g.d.u1[n - 1] -= tab.b[j] * hv.cwiseProduct(adj.stage_field(n, j, 0));
      g.d.u2[n - 1] += tab.b[j] * adj.stage_field(n, j, 2);
    }
  }
  g.grad = g.d + b0 * ubar;
  return g;
}

Evaluation evaluate(const Problem& problem, const Control& u) {
  Evaluation ev;
  ev.state = problem.solve(u);
  ev.J = cost_eval(ev.state, u, problem.cost, problem.grid, problem.time);
  const Linearization lin(problem, ev.state, u);
  ev.adjoint = solve_adjoint(lin, problem.cost);
  ev.gradient = gradient_from_adjoint(lin, ev.adjoint, u, problem.cost.b0);
  return ev;
}

GradientField reduced_gradient(const Control& ubar, const Problem& problem) {
  return evaluate(problem, ubar).gradient;
}

double reduced_cost(const Control& u, const Problem& problem) {
  return cost_eval(problem.solve(u), u, problem.cost, problem.grid, problem.time);
}

double stationarity_measure(const Control& ubar, const GradientField& g, const BoxConstraints& box,
                            const Grid& grid, const TimeGrid& time) {
  const Control p = project_admissible(ubar - g.grad, box);
  return control_norm(grid, time, ubar - p);
}

double stationarity_measure(const Control& ubar, const Problem& problem, const BoxConstraints& box) {
  return stationarity_measure(ubar, reduced_gradient(ubar, problem), box, problem.grid, problem.time);
}

FixedPointResidual projection_residual(const Control& ubar, const GradientField& g, double b0,
                                       const BoxConstraints& box, const Grid& grid,
                                       const TimeGrid& time) {
  const Control diff = ubar - project_admissible((-1.0 / b0) * g.d, box);
  return {control_norm(grid, time, diff), control_sup_norm(diff)};
}

PgdResult projected_gradient(const Control& u0, const Problem& problem, const BoxConstraints& box,
                             const PgdOptions& opt) {
  const Grid& grid = problem.grid;
  const TimeGrid& tg = problem.time;
  box.check(grid, tg);
  require(opt.tol > 0.0 && opt.max_iter >= 0 && opt.armijo_c > 0.0 && opt.armijo_c < 1.0 &&
              opt.backtrack > 0.0 && opt.backtrack < 1.0 && opt.initial_step > 0.0,
          ErrorCode::InvalidArgument, "invalid projected-gradient options");

  PgdResult res;
  res.u = project_admissible(u0, box);
  res.at_u = evaluate(problem, res.u);
  double stat = stationarity_measure(res.u, res.at_u.gradient, box, grid, tg);
  res.history.push_back({0, res.at_u.J, stat, 0.0, 0});

  double step = opt.initial_step / problem.cost.b0;
  for (int it = 1; it <= opt.max_iter && stat > opt.tol; ++it) {
    const Control& g = res.at_u.gradient.grad;
    double s = step;
    int bt = 0;
    bool accepted = false;
    Control trial;
    Evaluation ev;
    for (; bt <= opt.max_backtracks; ++bt, s *= opt.backtrack) {
      trial = project_admissible(res.u - s * g, box);
      const double slope = control_inner(grid, tg, g, trial - res.u);
      ev = evaluate(problem, trial);
      // Allow for round-off in J: near a minimizer the decrease drops below
      // it and the test would otherwise backtrack the step to nothing.
      const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(res.at_u.J);
      if (ev.J <= res.at_u.J + opt.armijo_c * slope + noise) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      fail(ErrorCode::LineSearchFailure,
           "Armijo backtracking exhausted at iteration " + std::to_string(it) +
               " (stationarity " + std::to_string(stat) + ")");

    // Barzilai-Borwein (long) step for the next iteration.
    const Control du = trial - res.u;
    const Control dg = ev.gradient.grad - g;
    const double sy = control_inner(grid, tg, du, dg);
    const double ss = control_inner(grid, tg, du, du);
    step = sy > 0.0 ? std::clamp(ss / sy, opt.step_min, opt.step_max) : s / opt.backtrack;

    res.u = std::move(trial);
    res.at_u = std::move(ev);
    stat = stationarity_measure(res.u, res.at_u.gradient, box, grid, tg);
    res.history.push_back({it, res.at_u.J, stat, s, bt});
  }
  res.converged = stat <= opt.tol;
  return res;
}

// ---------------------------------------------------------------------------
// Active sets and the critical cone
// ---------------------------------------------------------------------------

std::size_t ActiveSets::count() const {
  std::size_t c = 0;
  for (const auto& m : A1) c += static_cast<std::size_t>(m.count());
  for (const auto& m : A2) c += static_cast<std::size_t>(m.count());
  return c;
}

ActiveSets strongly_active_sets(const GradientField& g, double tau) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "tau must be positive");
  ActiveSets s;
  for (const auto& f : g.grad.u1) s.A1.push_back(f.array().abs() > tau);
  for (const auto& f : g.grad.u2) s.A2.push_back(f.array().abs() > tau);
  return s;
}

ActiveSets strongly_active_sets(const Control& ubar, const Linearization& lin,
                                const AdjointTrajectory& adj, double b0, double tau) {
  return strongly_active_sets(gradient_from_adjoint(lin, adj, ubar, b0), tau);
}

Control cone_project(const Control& h, const Control& ubar, const BoxConstraints& box,
                     const ActiveSets& sets, double bound_tol) {
  require(h.u1.size() == ubar.u1.size() && sets.A1.size() == h.u1.size() &&
              box.lower1.size() == h.u1.size(),
          ErrorCode::InvalidArgument, "cone_project: inconsistent shapes");
  Control out = h;
  auto project = [&](Field& v, const Field& u, const Field& lo, const Field& hi, const Mask& a) {
    for (Index i = 0; i < v.size(); ++i) {
      if (a[i]) {
        v[i] = 0.0;
        continue;
      }
      if (std::abs(u[i] - lo[i]) <= bound_tol) v[i] = std::max(v[i], 0.0);
      if (std::abs(u[i] - hi[i]) <= bound_tol) v[i] = std::min(v[i], 0.0);
    }
  };
  for (std::size_t n = 0; n < h.u1.size(); ++n) {
    project(out.u1[n], ubar.u1[n], box.lower1[n], box.upper1[n], sets.A1[n]);
    project(out.u2[n], ubar.u2[n], box.lower2[n], box.upper2[n], sets.A2[n]);
  }
  return out;
}

double default_tau(const GradientField& g) {
  return 1e-3 * std::max(control_sup_norm(g.grad), 1.0);
}

double default_bound_tol(const BoxConstraints& box) {
  double span = 0.0;
  for (std::size_t n = 0; n < box.lower1.size(); ++n) {
    span = std::max(span, (box.upper1[n] - box.lower1[n]).maxCoeff());
    span = std::max(span, (box.upper2[n] - box.lower2[n]).maxCoeff());
  }
  return 1e-9 * std::max(span, 1.0);
}

// ---------------------------------------------------------------------------
// Second-order form
// ---------------------------------------------------------------------------

void require_second_order_hypotheses(const Problem& problem) {
  require(problem.cost.b2 == 0.0, ErrorCode::Hypothesis,
          "second-order analysis assumes b2 = 0 (the terminal tracking weight must vanish)");
  require(problem.nonlin.smooth(), ErrorCode::Hypothesis,
          "second-order analysis needs smooth P and h; table shapes are only piecewise linear");
  require(problem.potential.kind != PotentialKind::Obstacle, ErrorCode::Hypothesis,
          "second-order analysis is not available for the obstacle potential");
}

SecondOrderForm::SecondOrderForm(const Linearization& lin, const AdjointTrajectory& adj)
    : lin_(lin), adj_(adj) {
  require_second_order_hypotheses(lin.problem());
  require(adj.steps() == lin.problem().time.steps, ErrorCode::InvalidArgument,
          "second-order form: adjoint does not match the problem");
}

double SecondOrderForm::operator()(const Control& h, const Control& k) const {
  const LinearizedTrajectory lh = lin_.linearize(h);
  const LinearizedTrajectory lk = lin_.linearize(k);
  return (*this)(lh, lk, h, k);
}

double SecondOrderForm::operator()(const LinearizedTrajectory& lh, const LinearizedTrajectory& lk,
                                   const Control& h, const Control& k) const {
  const auto& m = lin_.impl();
  const Problem& pb = m.problem;
  const Grid& grid = pb.grid;
  const TimeGrid& tg = pb.time;
  const auto& sys = m.sys;
  const int s = sys.stages();
  const Index M = sys.nodes();
  const double chi = pb.params.chi;
  const Field& w = grid.weights();
  const auto& b = m.tableau.b;

  double value = pb.cost.b0 * control_inner(grid, tg, h, k);
  if (pb.cost.b1 != 0.0) {
    double t = 0.0;
    for (int n = 0; n <= tg.steps; ++n)
      t += tg.trapezoid_weight(n) * inner(grid, lh.xi()[n], lk.xi()[n]);
    value += pb.cost.b1 * tg.dt() * t;
  }

  // Adjoint-weighted second derivative of the scheme:
  //   dt sum_n sum_j b_j int [(p - r) X - p H - q F''' xi_h xi_k]
  double coupling = 0.0;
  for (int n = 1; n <= tg.steps; ++n) {
    const Eigen::VectorXd& Zh = lh.stages[n - 1];
    const Eigen::VectorXd& Zk = lk.stages[n - 1];
    const Eigen::VectorXd& R = adj_.stages[n - 1];
    const Field& u1 = m.ubar.u1[n - 1];
    const Field& h1 = h.u1[n - 1];
    const Field& k1 = k.u1[n - 1];
    for (int j = 0; j < s; ++j) {
      const detail::StageCoefficients c = m.coefficients(n, j);
      double acc = 0.0;
      for (Index i = 0; i < M; ++i) {
        const Index ix = sys.index(i, j, 0);
        const double eh = Zh[ix], xh = Zh[ix + 1], th = Zh[ix + 2];
        const double ek = Zk[ix], xk = Zk[ix + 1], tk = Zk[ix + 2];
        const double X = c.ddP[i] * c.E[i] * xh * xk + c.dP[i] * xk * (th - chi * xh - eh) +
                         c.dP[i] * xh * (tk - chi * xk - ek);
        const double H = c.ddh[i] * u1[i] * xh * xk + c.dh[i] * (xh * k1[i] + xk * h1[i]);
        const double p = R[ix], q = R[ix + 1], r = R[ix + 2];
        acc += w[i] * ((p - r) * X - p * H - q * c.dF3[i] * xh * xk);
      }
      coupling += b[j] * acc;
    }
  }
  return value + tg.dt() * coupling;
}

double quadratic_form(const Control& ubar, const Control& h, const Control& k,
                      const Problem& problem) {
  require_second_order_hypotheses(problem);
  const StateTrajectory st = problem.solve(ubar);
  const Linearization lin(problem, st, ubar);
  const AdjointTrajectory adj = solve_adjoint(lin, problem.cost);
  return SecondOrderForm(lin, adj)(h, k);
}

// ---------------------------------------------------------------------------
// Sampled second-order sufficient condition
// ---------------------------------------------------------------------------

SscReport ssc_certificate(const Control& ubar, const Problem& problem, const BoxConstraints& box,
                          const SscOptions& opt) {
  require_second_order_hypotheses(problem);
  require(opt.n_samples >= 1, ErrorCode::InvalidArgument, "ssc needs at least one sample");
  box.check(problem.grid, problem.time);
  const Grid& grid = problem.grid;
  const TimeGrid& tg = problem.time;

  const StateTrajectory st = problem.solve(ubar);
  const Linearization lin(problem, st, ubar);
  const AdjointTrajectory adj = solve_adjoint(lin, problem.cost);
  const GradientField g = gradient_from_adjoint(lin, adj, ubar, problem.cost.b0);
  const SecondOrderForm form(lin, adj);

  SscReport rep;
  rep.tau = opt.tau > 0.0 ? opt.tau : default_tau(g);
  rep.n_samples = opt.n_samples;
  rep.seed = opt.seed;
  rep.stationarity = stationarity_measure(ubar, g, box, grid, tg);
  const double bound_tol = opt.bound_tol > 0.0 ? opt.bound_tol : default_bound_tol(box);
  const ActiveSets sets = strongly_active_sets(g, rep.tau);
  rep.active_count = sets.count();

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < opt.n_samples; ++k) {
    Control h = Control::zeros(grid, tg);
    for (int n = 0; n < tg.steps; ++n) {
      for (auto& v : h.u1[n]) v = normal(rng);
      for (auto& v : h.u2[n]) v = normal(rng);
    }
    const double raw = control_norm(grid, tg, h);
    const Control c = cone_project(h, ubar, box, sets, bound_tol);
    const double nc = control_norm(grid, tg, c);
    if (!(nc > opt.zero_tol * raw)) continue;
    const LinearizedTrajectory lc = lin.linearize(c);
    rep.quotients.push_back(form(lc, lc, c, c) / (nc * nc));
  }
  if (rep.quotients.empty())
    fail(ErrorCode::ConeTrivial, "every sampled direction projected to zero on the critical cone");
  rep.used_samples = static_cast<int>(rep.quotients.size());
  rep.min_rayleigh = *std::min_element(rep.quotients.begin(), rep.quotients.end());
  rep.max_rayleigh = *std::max_element(rep.quotients.begin(), rep.quotients.end());
  rep.satisfied = rep.min_rayleigh > 0.0;
  rep.delta_estimate = rep.satisfied ? rep.min_rayleigh : 0.0;
  return rep;
}

HessianSpectrum dense_hessian_spectrum(const Control& ubar, const Problem& problem,
                                       const ActiveSets& sets) {
  require_second_order_hypotheses(problem);
  const Grid& grid = problem.grid;
  const TimeGrid& tg = problem.time;
  const Index M = static_cast<Index>(grid.size());
  const Index nu = 2 * tg.steps * M;
  require(nu <= 400, ErrorCode::InvalidArgument,
          "dense Hessian check is limited to 400 control unknowns, problem has " + std::to_string(nu));

  const StateTrajectory st = problem.solve(ubar);
  const Linearization lin(problem, st, ubar);
  const AdjointTrajectory adj = solve_adjoint(lin, problem.cost);
  const SecondOrderForm form(lin, adj);

  // Unknown k: component (k / (steps M)), level (k / M) % steps, node k % M.
  auto unit = [&](Index k) {
    Control e = Control::zeros(grid, tg);
    const Index comp = k / (tg.steps * M);
    const Index level = (k / M) % tg.steps;
    (comp == 0 ? e.u1 : e.u2)[level][k % M] = 1.0;
    return e;
  };
  std::vector<Control> units;
  std::vector<LinearizedTrajectory> lins;
  units.reserve(nu);
  lins.reserve(nu);
  for (Index k = 0; k < nu; ++k) {
    units.push_back(unit(k));
    lins.push_back(lin.linearize(units.back()));
  }
  Eigen::MatrixXd H(nu, nu);
  Eigen::VectorXd mass(nu);
  for (Index a = 0; a < nu; ++a) {
    mass[a] = tg.dt() * grid.weights()[a % M];
    for (Index b = a; b < nu; ++b) H(a, b) = H(b, a) = form(lins[a], lins[b], units[a], units[b]);
  }
  // Symmetric scaling D^{-1/2} H D^{-1/2} turns the generalized problem into
  // a standard one.
  const Eigen::VectorXd is = mass.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd S = is.asDiagonal() * H * is.asDiagonal();

  HessianSpectrum out;
  out.unknowns = static_cast<int>(nu);
  out.min_all = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly)
                    .eigenvalues()
                    .minCoeff();
  std::vector<Index> free;
  for (Index k = 0; k < nu; ++k) {
    const Index comp = k / (tg.steps * M);
    const Index level = (k / M) % tg.steps;
    const bool active = (comp == 0 ? sets.A1 : sets.A2)[level][k % M];
    if (!active) free.push_back(k);
  }
  out.free_unknowns = static_cast<int>(free.size());
  if (!free.empty()) {
    Eigen::MatrixXd F(free.size(), free.size());
    for (std::size_t a = 0; a < free.size(); ++a)
      for (std::size_t b = 0; b < free.size(); ++b) F(a, b) = S(free[a], free[b]);
    out.min_free = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(F, Eigen::EigenvaluesOnly)
                       .eigenvalues()
                       .minCoeff();
  }
  return out;
}

}  // namespace tpf
