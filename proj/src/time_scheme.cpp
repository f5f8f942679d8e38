#include "tumorpf/time_scheme.hpp"

#include <cmath>
#include <string>

#include "tumorpf/error.hpp"

namespace tpf {

TimeGrid TimeGrid::make(double T, int steps) {
  require(T > 0.0 && std::isfinite(T), ErrorCode::InvalidArgument, "final time T must be positive");
  require(steps >= 1, ErrorCode::InvalidArgument, "time grid needs at least one step");
  return TimeGrid{T, steps};
}

RadauTableau RadauTableau::make(int stages) {
  RadauTableau t;
  t.stages = stages;
  t.a.resize(stages, stages);
  t.c.resize(stages);
  switch (stages) {
    case 1:
      t.a << 1.0;
      t.c << 1.0;
      break;
    case 2:
      t.a << 5.0 / 12.0, -1.0 / 12.0,
             3.0 / 4.0, 1.0 / 4.0;
      t.c << 1.0 / 3.0, 1.0;
      break;
    case 3: {
      const double s6 = std::sqrt(6.0);
      t.a << (88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0,
             (296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0,
             (16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0;
      t.c << (4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0;
      break;
    }
    default:
      fail(ErrorCode::InvalidArgument,
           "Radau IIA supports 1, 2 or 3 stages, got " + std::to_string(stages));
  }
  t.b = t.a.row(stages - 1).transpose();
  return t;
}

}  // namespace tpf
