#pragma once

#include <stdexcept>
#include <string>

namespace wlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define WLAB_DEFINE_ERROR(Name)                \
  class Name : public Error {                  \
   public:                                     \
    using Error::Error;                        \
  }

WLAB_DEFINE_ERROR(AntipodalPoint);
WLAB_DEFINE_ERROR(InvalidParams);
WLAB_DEFINE_ERROR(DegenerateInput);
WLAB_DEFINE_ERROR(InvalidTopology);
WLAB_DEFINE_ERROR(DomainError);
WLAB_DEFINE_ERROR(DegenerateCell);
WLAB_DEFINE_ERROR(NonTangent);
WLAB_DEFINE_ERROR(ZeroFunction);
WLAB_DEFINE_ERROR(SingularSystem);
WLAB_DEFINE_ERROR(MissingLabels);
WLAB_DEFINE_ERROR(NonConvexCone);
WLAB_DEFINE_ERROR(NotCMC);
WLAB_DEFINE_ERROR(OutOfBall);
WLAB_DEFINE_ERROR(WrongCurvatureSign);
WLAB_DEFINE_ERROR(NotNearEquality);
WLAB_DEFINE_ERROR(NoRoot);
WLAB_DEFINE_ERROR(ConfigError);

#undef WLAB_DEFINE_ERROR

/// Mesh file could not be parsed; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Iterative solver exhausted its budget. `best_residual` is the smallest
/// residual seen.
class SolverStall : public Error {
 public:
  SolverStall(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Fixed-point iteration did not converge.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace wlab
