#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "tumorpf/grid.hpp"
#include "tumorpf/time_scheme.hpp"

namespace tpf {

/// Relaxation alpha, viscosity beta, chemotaxis chi. All strictly positive.
struct ModelParams {
  double alpha = 1.0;
  double beta = 1.0;
  double chi = 1.0;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Double-well potentials
// ---------------------------------------------------------------------------

enum class PotentialKind { Regular, Logarithmic, Obstacle, Polynomial };

/// F = F1 + F2 with F1 convex, F1(0) = 0, F2 smooth.
///
///   regular      F = (1 - r^2)^2 / 4,         F1 = r^4/4, F2 = 1/4 - r^2/2
///   logarithmic  F = (1+r)ln(1+r) + (1-r)ln(1-r) - k1 r^2 on (-1, 1)
///                F1 = entropy part, F2 = -k1 r^2
///   obstacle     F = k2 (1 - r^2) on [-1, 1], +inf outside
///                F1 = indicator of [-1, 1], F2 = k2 (1 - r^2)
///   polynomial   F = sum_k c_k r^k; F1 collects the even monomials of degree
///                >= 2 with positive coefficient, F2 the rest.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::Regular;
  double k1 = 2.0;
  double k2 = 1.0;
  std::vector<double> coefficients;  // polynomial only, c_0 first

  static PotentialSpec regular();
  static PotentialSpec logarithmic(double k1 = 2.0);
  static PotentialSpec obstacle(double k2 = 1.0);
  static PotentialSpec polynomial(std::vector<double> coefficients);

  /// Open interval (r_-, r_+) on which F is differentiable.
  double lower() const noexcept;
  double upper() const noexcept;
  bool singular() const noexcept { return kind == PotentialKind::Logarithmic || kind == PotentialKind::Obstacle; }
  /// True when F''' vanishes identically.
  bool cubic_free() const noexcept;

  void validate() const;
};

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& id);

/// F^(order)(r), order in 0..3. Throws SeparationViolation outside the
/// domain and UnsupportedOrder for derivatives of the obstacle potential.
double potential_eval(const PotentialSpec& spec, double r, int order);

/// Convex part F1^(order)(r), order in 0..3. The obstacle F1 only has order 0
/// (0 on [-1, 1], +inf outside).
double convex_part_eval(const PotentialSpec& spec, double r, int order);

/// F2^(order)(r) = F^(order) - F1^(order); smooth on all of R.
double concave_part_eval(const PotentialSpec& spec, double r, int order);

/// prox_{eps F1}(r): the unique minimiser of s -> F1(s) + (s - r)^2 / (2 eps).
double yosida_prox(const PotentialSpec& spec, double eps, double r);

/// Moreau-Yosida derivative F'_{1,eps}(r) = (r - prox_{eps F1}(r)) / eps.
double yosida_derivative(const PotentialSpec& spec, double eps, double r);

/// F_{1,eps}^(order)(r) for order 0..3 (order 1 is yosida_derivative).
/// Higher orders use the chain rule through the prox and are a.e. values for
/// the obstacle kind.
double yosida_eval(const PotentialSpec& spec, double eps, double r, int order);

/// Derivatives of F as used by the time stepper: exact for the smooth kinds,
/// F'_{1,eps} + F2' when a Yosida level is set. The obstacle kind requires
/// yosida_eps > 0.
class SchemePotential {
 public:
  SchemePotential(PotentialSpec spec, double yosida_eps = 0.0);

  const PotentialSpec& spec() const noexcept { return spec_; }
  double yosida_eps() const noexcept { return eps_; }
  bool regularized() const noexcept { return eps_ > 0.0; }
  /// Whether the iterate must stay in the open domain (singular and exact).
  bool needs_separation() const noexcept { return spec_.singular() && !regularized(); }

  /// F^(order) for order 1..3.
  double derivative(double r, int order) const;
  /// Convex part of the energy density, used by the energy diagnostic.
  double convex_energy(double r) const;

 private:
  PotentialSpec spec_;
  double eps_;
};

// ---------------------------------------------------------------------------
// Proliferation P and truncation h
// ---------------------------------------------------------------------------

enum class ShapeKind { Constant, Ramp, Bump, Table };

/// Bounded nonnegative scalar function with derivatives up to order 2.
///
///   constant(c)                         c
///   ramp(lo, hi, v_lo, v_hi)            C-infinity step from v_lo (r <= lo)
///                                       to v_hi (r >= hi)
///   bump(amp, center, width)            amp * exp(-((r - center)/width)^2)
///   table(knots, values)                piecewise linear, constant outside;
///                                       not smooth (rejected by the
///                                       second-order analysis)
class Shape {
 public:
  static Shape constant(double c);
  static Shape ramp(double lo = -1.0, double hi = 1.0, double v_lo = 0.0, double v_hi = 1.0);
  static Shape bump(double amp, double center, double width);
  static Shape table(std::vector<double> knots, std::vector<double> values);

  /// Builds a shape from its configuration id and named parameters. Throws
  /// Config on an unknown id.
  static Shape from_id(const std::string& id, const std::map<std::string, double>& params,
                       const std::vector<double>& knots = {},
                       const std::vector<double>& values = {});

  ShapeKind kind() const noexcept { return kind_; }
  const std::string& id() const noexcept;
  const std::vector<double>& params() const noexcept { return params_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Value or derivative at r, order in 0..2.
  double eval(double r, int order) const;
  /// Declared bound on sup |shape|.
  double sup_bound() const noexcept;
  bool smooth() const noexcept { return kind_ != ShapeKind::Table; }

 private:
  ShapeKind kind_ = ShapeKind::Constant;
  std::vector<double> params_;
  std::vector<double> knots_;
  std::vector<double> values_;
};

struct NonlinearitySpec {
  Shape P = Shape::constant(0.0);
  Shape h = Shape::ramp();

  bool smooth() const noexcept { return P.smooth() && h.smooth(); }
};

enum class Which { P, H };

double nonlinearity_eval(const NonlinearitySpec& spec, Which which, double r, int order);

// ---------------------------------------------------------------------------
// Controls and cost data
// ---------------------------------------------------------------------------

/// Control pair on the space-time cylinder, piecewise constant in time:
/// level n holds the values on the interval (t_n, t_{n+1}], n = 0..steps-1.
struct Control {
  FieldSeries u1;
  FieldSeries u2;

  static Control zeros(const Grid& grid, const TimeGrid& time);
  static Control constant(const Grid& grid, const TimeGrid& time, double c1, double c2);

  int levels() const noexcept { return static_cast<int>(u1.size()); }
  /// Throws InvalidArgument unless both components have `time.steps` levels
  /// of grid-sized fields.
  void check(const Grid& grid, const TimeGrid& time, const char* what) const;

  Control& operator+=(const Control& o);
  Control& operator-=(const Control& o);
  Control& operator*=(double s);
};

Control operator+(Control a, const Control& b);
Control operator-(Control a, const Control& b);
Control operator*(double s, Control a);

/// Discrete L2(Q)^2 inner product: dt * sum_n sum_i w_i (a1 b1 + a2 b2).
double control_inner(const Grid& grid, const TimeGrid& time, const Control& a, const Control& b);
double control_norm(const Grid& grid, const TimeGrid& time, const Control& a);
double control_sup_norm(const Control& a);

/// Pointwise box [lower_i, upper_i] on each control component.
struct BoxConstraints {
  FieldSeries lower1, upper1, lower2, upper2;

  static BoxConstraints uniform(const Grid& grid, const TimeGrid& time, double lo1, double hi1,
                                double lo2, double hi2);
  /// Throws InvalidArgument on shape mismatch or lower > upper anywhere.
  void check(const Grid& grid, const TimeGrid& time) const;
  /// Radius R = max |bound| + 1 of the open L-infinity ball containing the box.
  double sup_radius() const;
};

/// Componentwise clamp; this is the L2(Q) projection onto the box.
Control project_admissible(const Control& u, const BoxConstraints& box);

/// Tracking weights b1, b2 >= 0, control cost b0 > 0, and targets. target_Q
/// has one snapshot per time level (steps + 1).
struct CostSpec {
  double b0 = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;
  FieldSeries target_Q;
  Field target_Omega;

  static CostSpec zero_targets(const Grid& grid, const TimeGrid& time, double b0, double b1,
                               double b2);
  void check(const Grid& grid, const TimeGrid& time) const;
};

}  // namespace tpf
