#pragma once

// Per-step algebra of the Radau IIA discretization shared by the forward,
// linearized, bilinearized and adjoint solvers.
//
// One step from y_prev (3M values, node-interleaved mu/phi/sigma) solves for
// the stage vector Z (s stages, layout ((node*s)+stage)*3+comp):
//
//   G_i(Z) = M (Y_i - y_prev) - dt sum_j a_ij f(Y_j, u) = 0,   i = 1..s
//
// with the per-node mass matrix M = [[alpha, 1, 0], [0, beta, 0], [0, 0, 1]]
// and
//
//   f_mu    = L mu    + P(phi) E - h(phi) u1
//   f_phi   = L phi   - F'(phi) + mu + chi sigma
//   f_sigma = L sigma - chi L phi - P(phi) E + u2,   E = sigma + chi(1-phi) - mu.
//
// The step value is the last stage.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tumorpf/grid.hpp"
#include "tumorpf/model.hpp"
#include "tumorpf/time_scheme.hpp"

namespace tpf::detail {

/// Pointwise coefficient fields at one stage, evaluated at the stage values.
struct StageCoefficients {
  Field mu, phi, sigma;
  Field E;                 // sigma + chi (1 - phi) - mu
  Field P, dP, ddP;        // P and derivatives at phi
  Field h, dh, ddh;        // truncation and derivatives at phi
  Field dF2, dF3;          // F'' and F''' at phi
};

class StepSystem {
 public:
  StepSystem(const Grid& grid, const ModelParams& params, const SchemePotential& potential,
             const NonlinearitySpec& nonlin, const RadauTableau& tableau, double dt);

  int stages() const noexcept { return s_; }
  Eigen::Index nodes() const noexcept { return m_; }
  Eigen::Index size() const noexcept { return 3 * s_ * m_; }
  Eigen::Index index(Eigen::Index node, int stage, int comp) const noexcept {
    return (node * s_ + stage) * 3 + comp;
  }
  const RadauTableau& tableau() const noexcept { return tab_; }
  double dt() const noexcept { return dt_; }
  const Grid& grid() const noexcept { return grid_; }
  const ModelParams& params() const noexcept { return params_; }

  /// Component `comp` of stage `stage` copied out of a stage vector.
  Field stage_field(const Eigen::VectorXd& Z, int stage, int comp) const;
  void set_stage_field(Eigen::VectorXd& Z, int stage, int comp, const Field& v) const;
  /// All stages equal to y (3M interleaved).
  Eigen::VectorXd replicate(const Eigen::VectorXd& y) const;
  /// The last stage as a 3M interleaved state vector.
  Eigen::VectorXd last_stage(const Eigen::VectorXd& Z) const;

  /// G(Z). When `scale` is given it receives the largest per-entry sum of
  /// term magnitudes, the reference for relative convergence tests.
  void residual(const Eigen::VectorXd& Z, const Eigen::VectorXd& y_prev, const Field& u1,
                const Field& u2, Eigen::VectorXd& G, double* scale = nullptr) const;

  /// dG/dZ at Z. With coupled = false only the terms that do not depend on
  /// the linearization point are kept (the lambda_1 = 0 operator).
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& Z, const Field& u1,
                                       bool coupled) const;

  StageCoefficients coefficients(const Eigen::VectorXd& Z, int stage) const;

  /// Applies M (per node) to a 3M interleaved vector.
  Eigen::VectorXd mass_apply(const Eigen::VectorXd& y) const;
  Eigen::VectorXd mass_transpose_apply(const Eigen::VectorXd& y) const;

  /// Stage right-hand side dt * sum_j a_ij src_j for per-stage sources given
  /// as a stage vector (same layout as Z), plus M y_prev in every stage.
  Eigen::VectorXd stage_rhs(const Eigen::VectorXd& y_prev, const Eigen::VectorXd& sources) const;

  /// Whether every stage phi lies in (lower + margin, upper - margin).
  bool phi_inside(const Eigen::VectorXd& Z, double lower, double upper) const;

 private:
  const Grid& grid_;
  ModelParams params_;
  const SchemePotential& potential_;
  const NonlinearitySpec& nonlin_;
  RadauTableau tab_;
  double dt_;
  int s_;
  Eigen::Index m_;
};

/// Interleaves (mu, phi, sigma) into one 3M vector.
Eigen::VectorXd interleave(const Field& mu, const Field& phi, const Field& sigma);
Field component(const Eigen::VectorXd& y, int comp);

}  // namespace tpf::detail
