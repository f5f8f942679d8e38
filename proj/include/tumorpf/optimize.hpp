#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tumorpf/adjoint.hpp"
#include "tumorpf/problem.hpp"
#include "tumorpf/sensitivity.hpp"

namespace tpf {

/// Discrete cost: trapezoid in time for the tracking term, the control
/// quadrature for the Tikhonov term,
///   J = b1/2 dt sum_n tau_n |phi_n - target_n|^2 + b2/2 |phi_N - target|^2
///     + b0/2 |u|^2_{L2(Q)}.
double cost_eval(const StateTrajectory& state, const Control& u, const CostSpec& cost,
                 const Grid& grid, const TimeGrid& time);

struct GradientField {
  Control d;     // (-h(phi) p, r), stage quadrature per control level
  Control grad;  // d + b0 ubar: L2(Q) Riesz representative of DJ_red
};

GradientField gradient_from_adjoint(const Linearization& lin, const AdjointTrajectory& adj,
                                    const Control& ubar, double b0);

/// Value, gradient and the solves behind them at one control.
struct Evaluation {
  StateTrajectory state;
  double J = 0.0;
  AdjointTrajectory adjoint;
  GradientField gradient;
};

/// One forward and one adjoint solve.
Evaluation evaluate(const Problem& problem, const Control& u);
GradientField reduced_gradient(const Control& ubar, const Problem& problem);
double reduced_cost(const Control& u, const Problem& problem);

/// |u - P(u - grad)|_{L2(Q)}; zero iff the discrete variational inequality holds.
double stationarity_measure(const Control& ubar, const GradientField& g, const BoxConstraints& box,
                            const Grid& grid, const TimeGrid& time);
double stationarity_measure(const Control& ubar, const Problem& problem, const BoxConstraints& box);

/// u - P(-d / b0) in the L2(Q) and sup norms (the projection formula).
struct FixedPointResidual {
  double l2 = 0.0;
  double sup = 0.0;
};
FixedPointResidual projection_residual(const Control& ubar, const GradientField& g, double b0,
                                       const BoxConstraints& box, const Grid& grid,
                                       const TimeGrid& time);

struct PgdOptions {
  double tol = 1e-7;
  int max_iter = 500;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double initial_step = 1.0;  // scaled by 1/b0
  double step_min = 1e-10;
  double step_max = 1e10;
};

struct PgdRecord {
  int iter = 0;
  double J = 0.0;
  double stationarity = 0.0;
  double step = 0.0;  // accepted step size (0 for the initial point)
  int backtracks = 0;
};

struct PgdResult {
  Control u;
  Evaluation at_u;
  std::vector<PgdRecord> history;
  bool converged = false;
};

/// Projected gradient with Barzilai-Borwein steps and projected Armijo
/// backtracking, J(P(u - s g)) <= J(u) + c <g, P(u - s g) - u>. Throws
/// LineSearchFailure when backtracking is exhausted.
PgdResult projected_gradient(const Control& u0, const Problem& problem, const BoxConstraints& box,
                             const PgdOptions& options);

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct ActiveSets {
  std::vector<Mask> A1, A2;  // one mask per control level
  std::size_t count() const;
};

/// {|grad_i| > tau}; grad = d + b0 ubar.
ActiveSets strongly_active_sets(const GradientField& g, double tau);
ActiveSets strongly_active_sets(const Control& ubar, const Linearization& lin,
                                const AdjointTrajectory& adj, double b0, double tau);

/// Maps h into the tau-critical cone: zero on the strongly active sets,
/// h_i >= 0 where ubar_i sits on lower_i, h_i <= 0 where it sits on upper_i
/// (within bound_tol).
Control cone_project(const Control& h, const Control& ubar, const BoxConstraints& box,
                     const ActiveSets& sets, double bound_tol);

/// Default tolerances: tau = 1e-3 max(|grad|_inf, 1), bound_tol = 1e-9 box span.
double default_tau(const GradientField& g);
double default_bound_tol(const BoxConstraints& box);

/// D2J_red(ubar)(h, k) from the linearized solves, the adjoint and the second
/// derivatives of the scheme. Requires b2 = 0 and smooth data.
class SecondOrderForm {
 public:
  SecondOrderForm(const Linearization& lin, const AdjointTrajectory& adj);

  double operator()(const Control& h, const Control& k) const;
  double operator()(const LinearizedTrajectory& lh, const LinearizedTrajectory& lk,
                    const Control& h, const Control& k) const;

  const Linearization& linearization() const noexcept { return lin_; }

 private:
  const Linearization& lin_;
  const AdjointTrajectory& adj_;
};

/// Throws Hypothesis unless b2 = 0, P and h are smooth shapes and the
/// potential is twice differentiable in the scheme.
void require_second_order_hypotheses(const Problem& problem);

double quadratic_form(const Control& ubar, const Control& h, const Control& k,
                      const Problem& problem);

struct SscOptions {
  double tau = 0.0;        // <= 0: default_tau
  double bound_tol = 0.0;  // <= 0: default_bound_tol
  int n_samples = 64;
  std::uint64_t seed = 1;
  double zero_tol = 1e-12;  // relative norm below which a projected sample is dropped
};

struct SscReport {
  double tau = 0.0;
  int n_samples = 0;      // requested
  int used_samples = 0;   // nonzero after cone projection
  double min_rayleigh = 0.0;
  double max_rayleigh = 0.0;
  double delta_estimate = 0.0;
  bool satisfied = false;
  std::uint64_t seed = 0;
  double stationarity = 0.0;
  std::size_t active_count = 0;
  std::vector<double> quotients;
};

/// Sampled check of the second-order sufficient condition on the
/// tau-critical cone: a necessary test, not a certificate. Throws
/// ConeTrivial when every sample projects to zero.
SscReport ssc_certificate(const Control& ubar, const Problem& problem, const BoxConstraints& box,
                          const SscOptions& options);

/// Smallest generalized eigenvalues of the dense reduced Hessian (w.r.t. the
/// L2(Q) mass), over all control unknowns and over the unknowns outside the
/// strongly active sets. Only for <= 400 unknowns.
struct HessianSpectrum {
  double min_all = 0.0;
  double min_free = 0.0;
  int unknowns = 0;
  int free_unknowns = 0;
};
HessianSpectrum dense_hessian_spectrum(const Control& ubar, const Problem& problem,
                                       const ActiveSets& sets);

}  // namespace tpf
