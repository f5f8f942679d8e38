#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "step_system.hpp"
#include "tumorpf/sensitivity.hpp"

namespace tpf {

struct Linearization::Impl {
  using Lu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

  Impl(const Problem& p, const StateTrajectory& s, const Control& u);

  const Problem& problem;
  const StateTrajectory& state;
  Control ubar;
  SchemePotential potential;
  RadauTableau tableau;
  detail::StepSystem sys;
  bool cache_factors;

  /// Solves A_n x = rhs (or A_n^T x = rhs) with the step-n Jacobian at the
  /// converged stages; coupled = false selects the l1 = 0 operator.
  Eigen::VectorXd solve(int step, const Eigen::VectorXd& rhs, bool coupled, bool transpose) const;

  detail::StageCoefficients coefficients(int step, int stage) const {
    return sys.coefficients(state.stages[static_cast<std::size_t>(step - 1)], stage);
  }

 private:
  std::unique_ptr<Lu> factorize(const Eigen::SparseMatrix<double>& A, int step) const;

  // Filled at construction (small systems only), so const use is thread-safe.
  std::vector<std::unique_ptr<Lu>> coupled_;
  std::unique_ptr<Lu> base_;  // the l1 = 0 matrix does not depend on the step
};

}  // namespace tpf
