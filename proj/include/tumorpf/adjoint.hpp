#pragma once

#include <vector>

#include <Eigen/Core>

#include "tumorpf/problem.hpp"
#include "tumorpf/sensitivity.hpp"

namespace tpf {

/// Discrete adjoint of the forward scheme.
///
/// p/q/r hold one field per time level: index N is the terminal value
/// (p, q, r)(T) = (0, b2 (phi(T) - target_Omega) / beta, 0) and index n < N is
/// the value handed from step n + 1 to step n. `stages[n]` holds the stage
/// adjoints of step n + 1 (same layout as the state stages); the reduced
/// gradient and the second-order form are quadratures over them.
struct AdjointTrajectory {
  TimeGrid time;
  int stage_count = 1;
  FieldSeries p, q, r;
  std::vector<Eigen::VectorXd> stages;

  int steps() const noexcept { return time.steps; }
  /// Component comp (0 p, 1 q, 2 r) of stage `stage` in step `step` (1-based).
  Field stage_field(int step, int stage, int comp) const;
};

/// Marches the transposed step Jacobians backward, with the derivative of
/// the discrete cost as source. Exact discrete duality holds by construction.
AdjointTrajectory solve_adjoint(const Linearization& lin, const CostSpec& cost);
AdjointTrajectory solve_adjoint(const Problem& problem, const StateTrajectory& state,
                                const Control& ubar, const CostSpec& cost);

/// The two sides of the duality identity for increment h:
///   lhs = -int_Q h(phi) h1 p + int_Q h2 r            (adjoint side)
///   rhs = b1 int_Q (phi - target_Q) xi + b2 int_Omega (phi(T) - target) xi(T)
/// with xi from the linearized solve; all integrals are the discrete ones.
struct DualityPair {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_residual() const noexcept;
};

DualityPair duality_sides(const Linearization& lin, const AdjointTrajectory& adj,
                          const CostSpec& cost, const Control& h);

}  // namespace tpf
