#pragma once

// Reference computations that share no code path with the library routines
// they check.

#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "tumorpf/model.hpp"

namespace oracle {

// prox_{eps F1}(r) by minimising s -> F1(s) + (s - r)^2 / (2 eps) directly.
// Brent's method brackets the minimiser; the strongly convex objective's
// stationarity condition is then refined with TOMS 748 inside that bracket.
inline double prox(const tpf::PotentialSpec& spec, double eps, double r) {
  using tpf::PotentialKind;
  if (spec.kind == PotentialKind::Obstacle) {
    // Quadratic on [-1, 1]: compare the interior critical point and the ends.
    auto obj = [&](double s) { return (s - r) * (s - r) / (2.0 * eps); };
    double best = -1.0;
    for (double s : {1.0, std::min(1.0, std::max(-1.0, r))})
      if (obj(s) < obj(best)) best = s;
    return best;
  }
  double lo = -1e6, hi = 1e6;
  if (spec.singular()) {
    lo = std::nextafter(-1.0, 0.0);
    hi = std::nextafter(1.0, 0.0);
  } else {
    lo = -std::abs(r) - 1.0;
    hi = std::abs(r) + 1.0;
  }
  auto objective = [&](double s) {
    return tpf::convex_part_eval(spec, s, 0) + (s - r) * (s - r) / (2.0 * eps);
  };
  const auto m = boost::math::tools::brent_find_minima(objective, lo, hi, 40);
  const double guess = m.first;
  const double width = 1e-6 * (1.0 + std::abs(guess));
  auto stationarity = [&](double s) { return tpf::convex_part_eval(spec, s, 1) + (s - r) / eps; };
  double a = std::max(lo, guess - width), b = std::min(hi, guess + width);
  if (stationarity(a) * stationarity(b) > 0.0) {
    // Brent stalls next to a singular domain edge; fall back to the whole
    // domain, where the minimiser may be the last representable point.
    a = lo;
    b = hi;
    if (stationarity(a) >= 0.0) return a;
    if (stationarity(b) <= 0.0) return b;
  }
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(
      stationarity, a, b, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (root.first + root.second);
}

// Minimal section of the subdifferential of F1 at r (inside its domain).
inline double minimal_section(const tpf::PotentialSpec& spec, double r) {
  if (spec.kind == tpf::PotentialKind::Obstacle) return 0.0;
  return tpf::convex_part_eval(spec, r, 1);
}

}  // namespace oracle
