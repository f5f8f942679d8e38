#pragma once

#include <Eigen/Core>

namespace tpf {

/// Uniform partition of (0, T) into `steps` intervals.
struct TimeGrid {
  double T = 1.0;
  int steps = 1;

  /// Throws InvalidArgument unless T > 0 and steps >= 1.
  static TimeGrid make(double T, int steps);

  double dt() const noexcept { return T / steps; }
  double time(int level) const noexcept { return T * level / steps; }
  int levels() const noexcept { return steps + 1; }
  /// Trapezoid weight of snapshot `level` in units of dt (1/2 at both ends).
  double trapezoid_weight(int level) const noexcept {
    return (level == 0 || level == steps) ? 0.5 : 1.0;
  }
};

/// Butcher tableau of an s-stage Radau IIA method (s = 1 is implicit Euler).
/// All members are stiffly accurate: the last stage is the step value.
struct RadauTableau {
  int stages = 1;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;

  /// Supports 1, 2 and 3 stages (orders 1, 3 and 5).
  static RadauTableau make(int stages);
  int order() const noexcept { return 2 * stages - 1; }
};

}  // namespace tpf
