#include "pstab/errors.hpp"

#include <sstream>

namespace pstab {

namespace {

std::string format_point(const Vec& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ')';
  return os.str();
}

std::string join(const std::vector<Diagnostic>& diagnostics) {
  std::string out = "invalid configuration";
  for (const auto& d : diagnostics) out += "; " + d.field + ": " + d.message;
  return out;
}

}  // namespace

DomainError::DomainError(const std::string& what, Vec point)
    : Error(what + " at x = " + format_point(point)), point_(std::move(point)) {}

SingularFError::SingularFError(Vec point, double condition_estimate)
    : Error("rank condition fails: F(x) singular (condition estimate " +
            std::to_string(condition_estimate) + ") at x = " + format_point(point)),
      point_(std::move(point)),
      condition_(condition_estimate) {}

GainInfeasibleError::GainInfeasibleError(double alpha, double minimal_alpha)
    : Error("gain alpha = " + std::to_string(alpha) +
            " is infeasible; alpha must exceed " + std::to_string(minimal_alpha)),
      alpha_(alpha),
      minimal_alpha_(minimal_alpha) {}

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : Error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace pstab
