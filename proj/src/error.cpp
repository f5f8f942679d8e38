#include "tumorpf/error.hpp"

#include <sstream>

namespace tpf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Config: return "configuration error";
    case ErrorCode::SeparationViolation: return "separation violation";
    case ErrorCode::UnsupportedOrder: return "unsupported derivative order";
    case ErrorCode::SolverDivergence: return "nonlinear solver divergence";
    case ErrorCode::StepRejected: return "time step rejected";
    case ErrorCode::SingularMatrix: return "singular step matrix";
    case ErrorCode::LineSearchFailure: return "line search failure";
    case ErrorCode::ConeTrivial: return "critical cone numerically trivial";
    case ErrorCode::Hypothesis: return "model hypothesis violated";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

namespace {
std::string separation_message(double value, double lower, double upper,
                               std::ptrdiff_t node, std::ptrdiff_t step) {
  std::ostringstream os;
  os.precision(17);
  os << "value " << value << " outside (" << lower << ", " << upper << ")";
  if (node >= 0) os << " at node " << node;
  if (step >= 0) os << " in step " << step;
  return os.str();
}
}  // namespace

SeparationViolation::SeparationViolation(double value, double lower,
                                         double upper, std::ptrdiff_t node,
                                         std::ptrdiff_t step)
    : Error(ErrorCode::SeparationViolation,
            separation_message(value, lower, upper, node, step)),
      value_(value),
      lower_(lower),
      upper_(upper),
      node_(node),
      step_(step) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace tpf
