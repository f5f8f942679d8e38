#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "tumorpf/adjoint.hpp"
#include "tumorpf/optimize.hpp"
#include "tumorpf/problem.hpp"

namespace tpf {

/// {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}
std::vector<double> default_eps_ladder();

/// Least-squares slope of log(err) against log(eps) over the positive
/// entries; NaN when fewer than two remain.
double fit_loglog_slope(const std::vector<double>& eps, const std::vector<double>& err);

struct SlopeReport {
  std::vector<double> eps_values;
  std::vector<double> error_values;
  double fitted_slope = 0.0;
  double expected_slope = 0.0;
  double band = 0.0;
  bool exact = false;  // every error at or below the floor: nothing to fit
  bool pass = false;

  /// Needs >= 3 strictly decreasing eps. Errors all <= floor count as exact
  /// (and pass); otherwise pass iff |slope - expected| <= band.
  static SlopeReport make(std::vector<double> eps, std::vector<double> err, double expected,
                          double band, double floor = 0.0);
};

/// Unit-norm Gaussian direction in L2(Q), reproducible from the seed.
Control random_direction(const Grid& grid, const TimeGrid& time, std::uint64_t seed);

/// Smooth random control a + amp * s(x, t) with |s| <= 1 built from a few
/// cosine modes; the same seed gives the same function on any resolution.
Control smooth_random_control(const Grid& grid, const TimeGrid& time, std::uint64_t seed,
                              double center1, double amp1, double center2, double amp2);

// ---------------------------------------------------------------------------
// Gradient and duality
// ---------------------------------------------------------------------------

struct GradientCheck {
  SlopeReport slope;                // first direction on the default ladder
  bool slope_gated = false;         // >= 3 ladder points above the round-off floor
  std::vector<double> best_errors;  // per direction, minimum over the eps window
  std::vector<double> best_eps;
  double worst_best_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Central differences of J_red against <grad, v> for n_dirs random
/// directions. Relative errors are taken against max(|<grad, v>|, |grad| |v|).
GradientCheck check_gradient_fd(const Problem& problem, const Control& ubar, int n_dirs,
                                std::uint64_t seed, double tol = 1e-8);

DualityPair check_duality(const Problem& problem, const Control& ubar, const Control& h);

// ---------------------------------------------------------------------------
// Taylor orders and the second-order form
// ---------------------------------------------------------------------------

struct TaylorReport {
  SlopeReport state;        // |S(u + e v) - S(u) - e DS v|                 ~ e^2
  SlopeReport sensitivity;  // |DS(u + e v) h - DS(u) h - e D2S(v, h)|      ~ e^2
  SlopeReport cost;         // |J(u + e v) - J(u) - e <g, v> - e^2/2 B(v,v)| ~ e^3
  bool pass() const noexcept { return state.pass && sensitivity.pass && cost.pass; }
};

/// h defaults to v. With a box, every u + e v must be admissible
/// (InvalidArgument otherwise). The cost check needs the second-order
/// hypotheses; its fit skips remainders at the round-off level of J and may
/// add steps 0.2, 0.4 above the ladder to keep three points.
TaylorReport check_taylor_orders(const Problem& problem, const Control& ubar, const Control& v,
                                 const Control* h = nullptr,
                                 const std::vector<double>& ladder = default_eps_ladder(),
                                 const BoxConstraints* box = nullptr, double band = 0.2);

struct SecondDifference {
  double fd = 0.0;        // Richardson-extrapolated second difference of J_red
  double form = 0.0;      // B(h, h)
  double rel_error = 0.0;
};

/// D(e) = (J(u + e h) - 2 J(u) + J(u - e h)) / e^2, fd = (4 D(e/2) - D(e)) / 3.
SecondDifference second_difference(const Problem& problem, const Control& ubar, const Control& h,
                                   double eps = 1e-2);

/// Data for which the second-order form is the Tikhonov term plus the
/// tracking of xi: P = 0, constant h, quadratic potential.
Problem decoupled_variant(const Problem& problem);

// ---------------------------------------------------------------------------
// Stability ratios
// ---------------------------------------------------------------------------

struct StabilityRatios {
  // Maxima over the sampled pairs, L2(Q) norms; *_sup use max over snapshots
  // of the L2(Omega) norm in the numerator (monitored only).
  double cd = 0.0, ds = 0.0, d2s = 0.0;
  double cd_sup = 0.0, ds_sup = 0.0, d2s_sup = 0.0;
  int pairs = 0;  // pairs with u1 != u2
};

/// |S(u1) - S(u2)| / |u1 - u2|,  |(DS(u1) - DS(u2)) h| / (|u1 - u2| |h|),
/// |(D2S(u1) - D2S(u2))(h, k)| / (|u1 - u2| |h| |k|).
StabilityRatios stability_ratios(const Problem& problem,
                                 const std::vector<std::pair<Control, Control>>& pairs,
                                 const Control& h, const Control& k);

struct StabilityCheck {
  StabilityRatios coarse, fine;
  double worst_change = 0.0;  // max over the three estimates of max(f/c, c/f)
  bool pass = false;          // worst_change < 2
};

/// Same smooth random pairs and increments on both resolutions, projected
/// onto the boxes when given.
StabilityCheck check_stability_ratios(const Problem& coarse, const Problem& fine, int n_pairs,
                                      std::uint64_t seed, const BoxConstraints* coarse_box = nullptr,
                                      const BoxConstraints* fine_box = nullptr);

// ---------------------------------------------------------------------------
// Continuous adjoint residual
// ---------------------------------------------------------------------------

struct AdjointResidual {
  std::vector<double> per_step;       // L2(Omega) norm of the strong-form residual
  std::vector<double> per_step_dual;  // same with Delta r eliminated via the r equation
  double l2 = 0.0;                    // L2(0, T; L2(Omega)) norms of the strong form
  double l2_dual = 0.0;
  // Integrated in time over (t_n, T): the weak-in-time form. The trapezoid
  // half weight at T leaves an O(1) strong residual on the last step only,
  // which this form sees as O(dt).
  double integrated = 0.0;
  double integrated_dual = 0.0;
  double adjoint_norm = 0.0;          // L2(Q) norm of (p, q, r), for scale
};

/// Plugs the discrete adjoint snapshots into a first-order backward
/// difference of the strong-form adjoint equations. Needs b2 = 0.
AdjointResidual adjoint_continuous_residual(const Problem& problem, const Control& ubar);

struct AdjointResidualCheck {
  AdjointResidual coarse, fine;
  double order = 0.0, order_dual = 0.0;                // integrated form, gated
  double strong_order = 0.0, strong_order_dual = 0.0;  // monitored
  double min_order = 0.0;
  bool pass = false;
};

AdjointResidualCheck check_adjoint_residual(const Problem& coarse, const Control& u_coarse,
                                            const Problem& fine, const Control& u_fine,
                                            double min_order = 0.9);

// ---------------------------------------------------------------------------
// Space-homogeneous reduction
// ---------------------------------------------------------------------------

struct OdePoint {
  double mu = 0.0, phi = 0.0, sigma = 0.0;
};

/// Adaptive Dormand-Prince integration of the space-homogeneous system of
/// `problem` (model data, potential and time grid) with piecewise-constant
/// controls, one value per level.
OdePoint ode_reference(const Problem& problem, const OdePoint& y0, const std::vector<double>& u1,
                       const std::vector<double>& u2, double tol = 1e-14);

struct OdeCheck {
  OdePoint pde, ode;
  double rel_error = 0.0;  // |pde - ode| / |ode| in R^3 at T
  double spatial_spread = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Requires spatially constant initial data and control.
OdeCheck check_ode_reduction(const Problem& problem, const Control& u, double tol = 1e-6);

/// Space-homogeneous copy of the problem: means of the initial data and of
/// each control level.
std::pair<Problem, Control> homogeneous_variant(const Problem& problem, const Control& u);

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

/// prox_{eps F1}(r) by bracketing the root of the monotone map
/// s -> F1'(s) + (s - r) / eps; independent of yosida_prox.
double prox_by_root(const PotentialSpec& spec, double eps, double r);

struct YosidaCheck {
  double derivative_at_zero = 0.0;
  double worst_lipschitz = 0.0;  // max eps |F'(a) - F'(b)| / |a - b|
  int lipschitz_pairs = 0;
  double prox_error = 0.0;       // max |yosida_prox - prox_by_root|
  int prox_points = 0;
  int monotone_violations = 0;   // |F'_{1,eps}| increasing as eps grows, or above |F1'|
  int monotone_points = 0;
  double convergence_gap = 0.0;  // max |F'_{1,eps_min} - F1'| at the sample points
  bool pass = false;
};

YosidaCheck check_yosida(const PotentialSpec& spec, double eps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

struct CheckEntry {
  std::string name;
  std::string anchor;  // the property being checked, in words
  nlohmann::ordered_json metrics;
  bool pass = false;
  bool gated = true;   // false: diagnostic only, never fails the suite
};

struct VerifySetup {
  const Problem* problem = nullptr;       // canonical resolution
  const BoxConstraints* box = nullptr;
  const Control* initial = nullptr;
  const Problem* coarse = nullptr;        // one (dt, h) coarsening, for order checks
  const BoxConstraints* coarse_box = nullptr;
  const Control* coarse_initial = nullptr;
  PgdOptions pgd;                         // tol is capped at 1e-9 for the optimality checks
  SscOptions ssc;
  double yosida_eps = 1e-2;
  int gradient_dirs = 10;
  int stability_pairs = 4;
  std::uint64_t seed = 1;
};

/// Runs every property check and returns one entry per check. `progress`,
/// when set, is called with each entry as it completes.
std::vector<CheckEntry> run_verification(const VerifySetup& setup,
                                         void (*progress)(const CheckEntry&, void*) = nullptr,
                                         void* user = nullptr);

}  // namespace tpf
