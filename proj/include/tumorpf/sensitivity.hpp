#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "tumorpf/problem.hpp"

namespace tpf {

/// Switches of the generalized linear system: l1 keeps the coupling terms
/// linearized at the base state, l2 the control increment, l3 the free
/// sources f, l4 the initial data. (1, 1, 0, 0) is the linearization.
struct LambdaFlags {
  int l1 = 1, l2 = 1, l3 = 0, l4 = 0;

  static LambdaFlags linearized() { return {}; }
  void validate() const;
};

/// Free right-hand sides (f1, f2, f3), one field per control level.
struct SourceTriple {
  FieldSeries f1, f2, f3;

  static SourceTriple zeros(const Grid& grid, const TimeGrid& time);
  void check(const Grid& grid, const TimeGrid& time) const;
};

/// Snapshots (steps + 1) and the Radau stage vectors of a linear solve;
/// component 0/1/2 is (eta, xi, theta) for DS and (nu, psi, rho) for D2S.
struct SensitivitySeries {
  TimeGrid time;
  int stage_count = 1;
  FieldSeries c0, c1, c2;
  std::vector<Eigen::VectorXd> stages;

  /// Component comp of stage `stage` in step `step` (1-based).
  Field stage_field(int step, int stage, int comp) const;
  int steps() const noexcept { return time.steps; }
};

struct LinearizedTrajectory : SensitivitySeries {
  const FieldSeries& eta() const noexcept { return c0; }
  const FieldSeries& xi() const noexcept { return c1; }
  const FieldSeries& theta() const noexcept { return c2; }
};

struct BilinearizedTrajectory : SensitivitySeries {
  const FieldSeries& nu() const noexcept { return c0; }
  const FieldSeries& psi() const noexcept { return c1; }
  const FieldSeries& rho() const noexcept { return c2; }
};

/// Per-step Jacobians of the forward scheme frozen at a converged state.
///
/// The object refers to `problem` and `state`; both must outlive it. The
/// factorizations are cached when the per-step system is small, so repeated
/// directional solves (and the adjoint) reuse them.
class Linearization {
 public:
  Linearization(const Problem& problem, const StateTrajectory& state, const Control& ubar);
  ~Linearization();
  Linearization(const Linearization&) = delete;
  Linearization& operator=(const Linearization&) = delete;

  LinearizedTrajectory solve(const LambdaFlags& flags, const Control& h, const SourceTriple* f,
                             const InitialData* init) const;
  /// DS(ubar)(h).
  LinearizedTrajectory linearize(const Control& h) const;
  BilinearizedTrajectory bilinearize(const LinearizedTrajectory& lin_h,
                                     const LinearizedTrajectory& lin_k, const Control& h,
                                     const Control& k) const;

  const Problem& problem() const noexcept;
  const StateTrajectory& state() const noexcept;
  const Control& control() const noexcept;

  struct Impl;
  const Impl& impl() const noexcept { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

/// Solves the generalized linear system around `state` (the trajectory at
/// ubar). f and init may be omitted when l3 resp. l4 is 0.
LinearizedTrajectory solve_generalized_linear(const Problem& problem, const StateTrajectory& state,
                                              const Control& ubar, const LambdaFlags& flags,
                                              const Control& h, const SourceTriple* f = nullptr,
                                              const InitialData* init = nullptr);

/// D2S(ubar)(k)(h) from lin_h = DS(ubar)(h) and lin_k = DS(ubar)(k).
BilinearizedTrajectory solve_bilinearized(const Problem& problem, const StateTrajectory& state,
                                          const Control& ubar, const LinearizedTrajectory& lin_h,
                                          const LinearizedTrajectory& lin_k, const Control& h,
                                          const Control& k);

/// L2(Q)^3 norm of a sensitivity series (trapezoid in time).
double series_norm(const Grid& grid, const SensitivitySeries& s);
/// L2(Q)^3 distance between two series on the same grids.
double series_distance(const Grid& grid, const SensitivitySeries& a, const SensitivitySeries& b);
/// L2(Q)^3 distance between a sensitivity series and a difference quotient
/// (a - b - c) of trajectories, used by the Taylor tests.
double state_remainder(const Grid& grid, const StateTrajectory& a, const StateTrajectory& b,
                       const SensitivitySeries& d, double eps);

}  // namespace tpf
