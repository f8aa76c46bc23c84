#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pstab/linalg.hpp"

namespace pstab {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vector or matrix argument has the wrong size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An evaluation point (or a finite-difference probe around it) lies outside
/// the state domain.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, Vec point);
  const Vec& point() const { return point_; }

 private:
  Vec point_;
};

/// The matrix of control directions and projected brackets is singular (or
/// numerically so) at `point`, i.e. the rank condition fails there.
class SingularFError : public Error {
 public:
  SingularFError(Vec point, double condition_estimate);
  const Vec& point() const { return point_; }
  double condition_estimate() const { return condition_; }

 private:
  Vec point_;
  double condition_;
};

/// The gain alpha is too small for the contraction estimate to hold.
class GainInfeasibleError : public Error {
 public:
  GainInfeasibleError(double alpha, double minimal_alpha);
  double alpha() const { return alpha_; }
  double minimal_alpha() const { return minimal_alpha_; }

 private:
  double alpha_;
  double minimal_alpha_;
};

struct Diagnostic {
  std::string field;
  std::string message;
};

/// Invalid experiment configuration; carries one diagnostic per bad field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace pstab
