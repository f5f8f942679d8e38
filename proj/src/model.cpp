#include "tumorpf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tumorpf/error.hpp"

namespace tpf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_order(int order, int max_order) {
  require(order >= 0 && order <= max_order, ErrorCode::UnsupportedOrder,
          "derivative order " + std::to_string(order) + " not in 0.." + std::to_string(max_order));
}

double monomial_derivative(double c, int k, double r, int order) {
  if (order > k) return 0.0;
  double factor = c;
  for (int j = 0; j < order; ++j) factor *= (k - j);
  return factor * std::pow(r, k - order);
}

bool in_convex_part(const PotentialSpec& spec, int k) {
  return k >= 2 && k % 2 == 0 && spec.coefficients[k] > 0.0;
}

// x ln x with the continuous extension 0 at x = 0.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void require_open_domain(const PotentialSpec& spec, double r) {
  if (!(r > spec.lower() && r < spec.upper()))
    throw SeparationViolation(r, spec.lower(), spec.upper());
}

}  // namespace

void ModelParams::validate() const {
  require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must be positive");
  require(beta > 0.0 && std::isfinite(beta), ErrorCode::InvalidArgument, "beta must be positive");
  require(chi > 0.0 && std::isfinite(chi), ErrorCode::InvalidArgument, "chi must be positive");
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

PotentialSpec PotentialSpec::regular() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::logarithmic(double k1) {
  PotentialSpec s;
  s.kind = PotentialKind::Logarithmic;
  s.k1 = k1;
  return s;
}

PotentialSpec PotentialSpec::obstacle(double k2) {
  PotentialSpec s;
  s.kind = PotentialKind::Obstacle;
  s.k2 = k2;
  return s;
}

PotentialSpec PotentialSpec::polynomial(std::vector<double> coefficients) {
  PotentialSpec s;
  s.kind = PotentialKind::Polynomial;
  s.coefficients = std::move(coefficients);
  return s;
}

double PotentialSpec::lower() const noexcept { return singular() ? -1.0 : -kInf; }
double PotentialSpec::upper() const noexcept { return singular() ? 1.0 : kInf; }

bool PotentialSpec::cubic_free() const noexcept {
  if (kind != PotentialKind::Polynomial) return false;
  for (std::size_t k = 3; k < coefficients.size(); ++k)
    if (coefficients[k] != 0.0) return false;
  return true;
}

void PotentialSpec::validate() const {
  switch (kind) {
    case PotentialKind::Logarithmic:
      require(std::isfinite(k1), ErrorCode::InvalidArgument, "k1 must be finite");
      break;
    case PotentialKind::Obstacle:
      require(k2 > 0.0 && std::isfinite(k2), ErrorCode::InvalidArgument, "k2 must be positive");
      break;
    case PotentialKind::Polynomial:
      require(!coefficients.empty(), ErrorCode::InvalidArgument,
              "polynomial potential needs at least one coefficient");
      for (double c : coefficients)
        require(std::isfinite(c), ErrorCode::InvalidArgument, "polynomial coefficients must be finite");
      break;
    case PotentialKind::Regular:
      break;
  }
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Regular: return "regular";
    case PotentialKind::Logarithmic: return "logarithmic";
    case PotentialKind::Obstacle: return "obstacle";
    case PotentialKind::Polynomial: return "polynomial";
  }
  return "regular";
}

PotentialKind potential_kind_from_string(const std::string& id) {
  if (id == "regular") return PotentialKind::Regular;
  if (id == "logarithmic") return PotentialKind::Logarithmic;
  if (id == "obstacle") return PotentialKind::Obstacle;
  if (id == "polynomial" || id == "custom-polynomial") return PotentialKind::Polynomial;
  fail(ErrorCode::Config, "unknown potential kind '" + id + "'");
}

double convex_part_eval(const PotentialSpec& spec, double r, int order) {
  check_order(order, 3);
  switch (spec.kind) {
    case PotentialKind::Regular: {
      constexpr double f[] = {0.25, 1.0, 3.0, 6.0};
      return f[order] * std::pow(r, 4 - order);
    }
    case PotentialKind::Logarithmic:
      if (order == 0) {
        if (std::abs(r) > 1.0) return kInf;
        return xlogx(1.0 + r) + xlogx(1.0 - r);
      }
      require_open_domain(spec, r);
      if (order == 1) return std::log1p(r) - std::log1p(-r);
      if (order == 2) return 2.0 / ((1.0 - r) * (1.0 + r));
      return 1.0 / ((1.0 - r) * (1.0 - r)) - 1.0 / ((1.0 + r) * (1.0 + r));
    case PotentialKind::Obstacle:
      require(order == 0, ErrorCode::UnsupportedOrder,
              "obstacle convex part is an indicator; only order 0 is defined");
      return std::abs(r) <= 1.0 ? 0.0 : kInf;
    case PotentialKind::Polynomial: {
      double v = 0.0;
      for (int k = 0; k < static_cast<int>(spec.coefficients.size()); ++k)
        if (in_convex_part(spec, k)) v += monomial_derivative(spec.coefficients[k], k, r, order);
      return v;
    }
  }
  return 0.0;
}

double concave_part_eval(const PotentialSpec& spec, double r, int order) {
  check_order(order, 3);
  switch (spec.kind) {
    case PotentialKind::Regular:
      if (order == 0) return 0.25 - 0.5 * r * r;
      if (order == 1) return -r;
      return order == 2 ? -1.0 : 0.0;
    case PotentialKind::Logarithmic:
      if (order == 0) return -spec.k1 * r * r;
      if (order == 1) return -2.0 * spec.k1 * r;
      if (order == 2) return -2.0 * spec.k1;
      return 0.0;
    case PotentialKind::Obstacle:
      if (order == 0) return spec.k2 * (1.0 - r * r);
      if (order == 1) return -2.0 * spec.k2 * r;
      if (order == 2) return -2.0 * spec.k2;
      return 0.0;
    case PotentialKind::Polynomial: {
      double v = 0.0;
      for (int k = 0; k < static_cast<int>(spec.coefficients.size()); ++k)
        if (!in_convex_part(spec, k)) v += monomial_derivative(spec.coefficients[k], k, r, order);
      return v;
    }
  }
  return 0.0;
}

double potential_eval(const PotentialSpec& spec, double r, int order) {
  check_order(order, 3);
  switch (spec.kind) {
    case PotentialKind::Regular:
      if (order == 0) return 0.25 * (1.0 - r * r) * (1.0 - r * r);
      if (order == 1) return r * r * r - r;
      if (order == 2) return 3.0 * r * r - 1.0;
      return 6.0 * r;
    case PotentialKind::Logarithmic:
      if (order == 0) {
        if (std::abs(r) > 1.0) throw SeparationViolation(r, -1.0, 1.0);
        if (std::abs(r) == 1.0) return 2.0 * std::log(2.0) - spec.k1;
      }
      return convex_part_eval(spec, r, order) + concave_part_eval(spec, r, order);
    case PotentialKind::Obstacle:
      require(order == 0, ErrorCode::UnsupportedOrder,
              "obstacle potential is not differentiable; use a Yosida level");
      if (std::abs(r) > 1.0) throw SeparationViolation(r, -1.0, 1.0);
      return spec.k2 * (1.0 - r * r);
    case PotentialKind::Polynomial: {
      double v = 0.0;
      for (int k = 0; k < static_cast<int>(spec.coefficients.size()); ++k)
        v += monomial_derivative(spec.coefficients[k], k, r, order);
      return v;
    }
  }
  return 0.0;
}

double yosida_prox(const PotentialSpec& spec, double eps, double r) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "Yosida level must be positive");
  if (spec.kind == PotentialKind::Obstacle) return std::clamp(r, -1.0, 1.0);
  if (r == 0.0) return 0.0;

  // F1' is odd-signed and increasing, so the root of s + eps F1'(s) = r lies
  // between 0 and r (and inside the open domain).
  double lo = std::min(0.0, r);
  double hi = std::max(0.0, r);
  if (spec.kind == PotentialKind::Logarithmic) {
    lo = std::max(lo, std::nextafter(-1.0, 0.0));
    hi = std::min(hi, std::nextafter(1.0, 0.0));
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double g = s + eps * convex_part_eval(spec, s, 1) - r;
    if (g == 0.0) return s;
    (g > 0.0 ? hi : lo) = s;
    const double dg = 1.0 + eps * convex_part_eval(spec, s, 2);
    double next = s - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-16 * (1.0 + std::abs(s)) || hi - lo <= 1e-16 * (1.0 + std::abs(s)))
      return next;
    s = next;
  }
  return s;
}

double yosida_derivative(const PotentialSpec& spec, double eps, double r) {
  if (r == 0.0) return 0.0;
  return (r - yosida_prox(spec, eps, r)) / eps;
}

double yosida_eval(const PotentialSpec& spec, double eps, double r, int order) {
  check_order(order, 3);
  const double s = yosida_prox(spec, eps, r);
  if (order == 0) {
    const double f1 = spec.kind == PotentialKind::Obstacle ? 0.0 : convex_part_eval(spec, s, 0);
    return f1 + (r - s) * (r - s) / (2.0 * eps);
  }
  if (order == 1) return r == 0.0 ? 0.0 : (r - s) / eps;
  if (spec.kind == PotentialKind::Obstacle) {
    if (order == 2) return std::abs(r) > 1.0 ? 1.0 / eps : 0.0;
    return 0.0;
  }
  const double f2 = convex_part_eval(spec, s, 2);
  const double denom = 1.0 + eps * f2;
  if (order == 2) return f2 / denom;
  return convex_part_eval(spec, s, 3) / (denom * denom * denom);
}

SchemePotential::SchemePotential(PotentialSpec spec, double yosida_eps)
    : spec_(std::move(spec)), eps_(yosida_eps) {
  spec_.validate();
  require(eps_ >= 0.0, ErrorCode::InvalidArgument, "Yosida level must be nonnegative");
  require(spec_.kind != PotentialKind::Obstacle || eps_ > 0.0, ErrorCode::InvalidArgument,
          "the obstacle potential requires a Yosida level yosida_eps > 0");
}

double SchemePotential::derivative(double r, int order) const {
  if (eps_ > 0.0) return yosida_eval(spec_, eps_, r, order) + concave_part_eval(spec_, r, order);
  return potential_eval(spec_, r, order);
}

double SchemePotential::convex_energy(double r) const {
  if (eps_ > 0.0) return yosida_eval(spec_, eps_, r, 0);
  return convex_part_eval(spec_, r, 0);
}

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

namespace {

// C-infinity step S(x): 0 for x <= 0, 1 for x >= 1, built from
// a(x) = exp(-1/x). Returns S^(order)(x) for order 0..2.
double smooth_step(double x, int order) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return order == 0 ? 1.0 : 0.0;
  auto a0 = [](double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; };
  auto a1 = [&](double z) { return z > 0.0 ? a0(z) / (z * z) : 0.0; };
  auto a2 = [&](double z) { return z > 0.0 ? a0(z) * (1.0 - 2.0 * z) / (z * z * z * z) : 0.0; };
  const double a = a0(x), da = a1(x), dda = a2(x);
  const double b = a0(1.0 - x), db = -a1(1.0 - x), ddb = a2(1.0 - x);
  const double d = a + b;
  if (order == 0) return a / d;
  const double num = da * b - a * db;
  if (order == 1) return num / (d * d);
  const double dnum = dda * b - a * ddb;
  return (dnum * d - 2.0 * num * (da + db)) / (d * d * d);
}

const std::string kShapeIds[] = {"constant", "ramp", "bump", "table"};

double param(const std::map<std::string, double>& p, const std::string& key, double fallback,
             const std::string& id) {
  auto it = p.find(key);
  if (it != p.end()) return it->second;
  if (std::isnan(fallback)) fail(ErrorCode::Config, "shape '" + id + "' needs parameter '" + key + "'");
  return fallback;
}

}  // namespace

Shape Shape::constant(double c) {
  require(c >= 0.0 && std::isfinite(c), ErrorCode::InvalidArgument, "constant shape must be nonnegative");
  Shape s;
  s.kind_ = ShapeKind::Constant;
  s.params_ = {c};
  return s;
}

Shape Shape::ramp(double lo, double hi, double v_lo, double v_hi) {
  require(hi > lo, ErrorCode::InvalidArgument, "ramp needs lo < hi");
  require(v_lo >= 0.0 && v_hi >= 0.0, ErrorCode::InvalidArgument, "ramp values must be nonnegative");
  Shape s;
  s.kind_ = ShapeKind::Ramp;
  s.params_ = {lo, hi, v_lo, v_hi};
  return s;
}

Shape Shape::bump(double amp, double center, double width) {
  require(amp >= 0.0, ErrorCode::InvalidArgument, "bump amplitude must be nonnegative");
  require(width > 0.0, ErrorCode::InvalidArgument, "bump width must be positive");
  Shape s;
  s.kind_ = ShapeKind::Bump;
  s.params_ = {amp, center, width};
  return s;
}

Shape Shape::table(std::vector<double> knots, std::vector<double> values) {
  require(knots.size() >= 2 && knots.size() == values.size(), ErrorCode::InvalidArgument,
          "table shape needs >= 2 knots and one value per knot");
  for (std::size_t i = 1; i < knots.size(); ++i)
    require(knots[i] > knots[i - 1], ErrorCode::InvalidArgument, "table knots must increase strictly");
  for (double v : values)
    require(v >= 0.0, ErrorCode::InvalidArgument, "table values must be nonnegative");
  Shape s;
  s.kind_ = ShapeKind::Table;
  s.knots_ = std::move(knots);
  s.values_ = std::move(values);
  return s;
}

Shape Shape::from_id(const std::string& id, const std::map<std::string, double>& p,
                     const std::vector<double>& knots, const std::vector<double>& values) {
  constexpr double req = std::numeric_limits<double>::quiet_NaN();
  if (id == "constant") return constant(param(p, "value", req, id));
  if (id == "ramp")
    return ramp(param(p, "lo", -1.0, id), param(p, "hi", 1.0, id), param(p, "low_value", 0.0, id),
                param(p, "high_value", 1.0, id));
  if (id == "bump")
    return bump(param(p, "amplitude", req, id), param(p, "center", 0.0, id), param(p, "width", 1.0, id));
  if (id == "table") return table(knots, values);
  fail(ErrorCode::Config, "unknown shape id '" + id + "'");
}

const std::string& Shape::id() const noexcept { return kShapeIds[static_cast<int>(kind_)]; }

double Shape::eval(double r, int order) const {
  require(order >= 0 && order <= 2, ErrorCode::UnsupportedOrder,
          "nonlinearity derivatives are available up to order 2");
  switch (kind_) {
    case ShapeKind::Constant:
      return order == 0 ? params_[0] : 0.0;
    case ShapeKind::Ramp: {
      const double lo = params_[0], hi = params_[1], v_lo = params_[2], v_hi = params_[3];
      const double inv = 1.0 / (hi - lo);
      const double scale = order == 0 ? 1.0 : (order == 1 ? inv : inv * inv);
      const double s = smooth_step((r - lo) * inv, order);
      return order == 0 ? v_lo + (v_hi - v_lo) * s : (v_hi - v_lo) * s * scale;
    }
    case ShapeKind::Bump: {
      const double amp = params_[0], w = params_[2];
      const double z = (r - params_[1]) / w;
      const double g = amp * std::exp(-z * z);
      if (order == 0) return g;
      if (order == 1) return -2.0 * z * g / w;
      return (4.0 * z * z - 2.0) * g / (w * w);
    }
    case ShapeKind::Table: {
      if (r <= knots_.front()) return order == 0 ? values_.front() : 0.0;
      if (r >= knots_.back()) return order == 0 ? values_.back() : 0.0;
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
      const double slope = (values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]);
      if (order == 0) return values_[i] + slope * (r - knots_[i]);
      return order == 1 ? slope : 0.0;
    }
  }
  return 0.0;
}

double Shape::sup_bound() const noexcept {
  switch (kind_) {
    case ShapeKind::Constant: return params_[0];
    case ShapeKind::Ramp: return std::max(params_[2], params_[3]);
    case ShapeKind::Bump: return params_[0];
    case ShapeKind::Table: return *std::max_element(values_.begin(), values_.end());
  }
  return 0.0;
}

double nonlinearity_eval(const NonlinearitySpec& spec, Which which, double r, int order) {
  return (which == Which::P ? spec.P : spec.h).eval(r, order);
}

// ---------------------------------------------------------------------------
// Controls, boxes, cost data
// ---------------------------------------------------------------------------

Control Control::zeros(const Grid& grid, const TimeGrid& time) {
  return constant(grid, time, 0.0, 0.0);
}

Control Control::constant(const Grid& grid, const TimeGrid& time, double c1, double c2) {
  Control u;
  u.u1.assign(time.steps, grid.constant(c1));
  u.u2.assign(time.steps, grid.constant(c2));
  return u;
}

void Control::check(const Grid& grid, const TimeGrid& time, const char* what) const {
  require(static_cast<int>(u1.size()) == time.steps && static_cast<int>(u2.size()) == time.steps,
          ErrorCode::InvalidArgument,
          std::string(what) + ": control needs " + std::to_string(time.steps) + " time levels");
  for (const auto& f : u1) grid.check(f, what);
  for (const auto& f : u2) grid.check(f, what);
}

Control& Control::operator+=(const Control& o) {
  for (std::size_t n = 0; n < u1.size(); ++n) {
    u1[n] += o.u1[n];
    u2[n] += o.u2[n];
  }
  return *this;
}

Control& Control::operator-=(const Control& o) {
  for (std::size_t n = 0; n < u1.size(); ++n) {
    u1[n] -= o.u1[n];
    u2[n] -= o.u2[n];
  }
  return *this;
}

Control& Control::operator*=(double s) {
  for (std::size_t n = 0; n < u1.size(); ++n) {
    u1[n] *= s;
    u2[n] *= s;
  }
  return *this;
}

Control operator+(Control a, const Control& b) { return a += b; }
Control operator-(Control a, const Control& b) { return a -= b; }
Control operator*(double s, Control a) { return a *= s; }

double control_inner(const Grid& grid, const TimeGrid& time, const Control& a, const Control& b) {
  require(a.u1.size() == b.u1.size() && a.u2.size() == b.u2.size(), ErrorCode::InvalidArgument,
          "control_inner: level count mismatch");
  double s = 0.0;
  for (std::size_t n = 0; n < a.u1.size(); ++n)
    s += inner(grid, a.u1[n], b.u1[n]) + inner(grid, a.u2[n], b.u2[n]);
  return time.dt() * s;
}

double control_norm(const Grid& grid, const TimeGrid& time, const Control& a) {
  return std::sqrt(control_inner(grid, time, a, a));
}

double control_sup_norm(const Control& a) {
  double m = 0.0;
  for (const auto& f : a.u1) m = std::max(m, f.cwiseAbs().maxCoeff());
  for (const auto& f : a.u2) m = std::max(m, f.cwiseAbs().maxCoeff());
  return m;
}

BoxConstraints BoxConstraints::uniform(const Grid& grid, const TimeGrid& time, double lo1,
                                       double hi1, double lo2, double hi2) {
  BoxConstraints b;
  b.lower1.assign(time.steps, grid.constant(lo1));
  b.upper1.assign(time.steps, grid.constant(hi1));
  b.lower2.assign(time.steps, grid.constant(lo2));
  b.upper2.assign(time.steps, grid.constant(hi2));
  b.check(grid, time);
  return b;
}

void BoxConstraints::check(const Grid& grid, const TimeGrid& time) const {
  const auto steps = static_cast<std::size_t>(time.steps);
  require(lower1.size() == steps && upper1.size() == steps && lower2.size() == steps &&
              upper2.size() == steps,
          ErrorCode::InvalidArgument, "box constraints need one field per control level");
  for (std::size_t n = 0; n < steps; ++n) {
    grid.check(lower1[n], "box lower1");
    grid.check(upper1[n], "box upper1");
    grid.check(lower2[n], "box lower2");
    grid.check(upper2[n], "box upper2");
    require((lower1[n].array() <= upper1[n].array()).all() &&
                (lower2[n].array() <= upper2[n].array()).all(),
            ErrorCode::InvalidArgument,
            "box constraints: lower bound exceeds upper bound at level " + std::to_string(n));
  }
}

double BoxConstraints::sup_radius() const {
  double m = 0.0;
  for (const auto* series : {&lower1, &upper1, &lower2, &upper2})
    for (const auto& f : *series) m = std::max(m, f.cwiseAbs().maxCoeff());
  return m + 1.0;
}

Control project_admissible(const Control& u, const BoxConstraints& box) {
  require(u.u1.size() == box.lower1.size() && u.u2.size() == box.lower2.size(),
          ErrorCode::InvalidArgument, "project_admissible: control and box level counts differ");
  Control p = u;
  for (std::size_t n = 0; n < u.u1.size(); ++n) {
    require(u.u1[n].size() == box.lower1[n].size() && u.u2[n].size() == box.lower2[n].size(),
            ErrorCode::InvalidArgument, "project_admissible: control and box shapes differ");
    p.u1[n] = u.u1[n].cwiseMax(box.lower1[n]).cwiseMin(box.upper1[n]);
    p.u2[n] = u.u2[n].cwiseMax(box.lower2[n]).cwiseMin(box.upper2[n]);
  }
  return p;
}

CostSpec CostSpec::zero_targets(const Grid& grid, const TimeGrid& time, double b0, double b1,
                                double b2) {
  CostSpec c;
  c.b0 = b0;
  c.b1 = b1;
  c.b2 = b2;
  c.target_Q.assign(time.levels(), grid.zeros());
  c.target_Omega = grid.zeros();
  c.check(grid, time);
  return c;
}

void CostSpec::check(const Grid& grid, const TimeGrid& time) const {
  require(b0 > 0.0, ErrorCode::InvalidArgument, "cost weight b0 must be positive");
  require(b1 >= 0.0 && b2 >= 0.0, ErrorCode::InvalidArgument, "cost weights b1, b2 must be nonnegative");
  require(static_cast<int>(target_Q.size()) == time.levels(), ErrorCode::InvalidArgument,
          "target_Q needs one snapshot per time level");
  for (const auto& f : target_Q) grid.check(f, "target_Q");
  grid.check(target_Omega, "target_Omega");
}

}  // namespace tpf
