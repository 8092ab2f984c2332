#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbfshape {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two or more points coincide, or the cloud is too small to be useful.
class DegenerateCloudError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear solve that could not reach the residual tolerance.
class IllConditionedSolveError : public std::runtime_error {
 public:
  IllConditionedSolveError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

class NoFeasibleCandidateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the fallback cannot bring the condition number below the threshold.
class GuaranteeViolationError : public std::runtime_error {
 public:
  GuaranteeViolationError(const std::string& what, double achieved_cond)
      : std::runtime_error(what), achieved_cond_(achieved_cond) {}

  double achieved_cond() const noexcept { return achieved_cond_; }

 private:
  double achieved_cond_;
};

class InvalidModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

class LocalWeightsError : public std::runtime_error {
 public:
  LocalWeightsError(const std::string& what, std::size_t stencil)
      : std::runtime_error(what), stencil_(stencil) {}

  std::size_t stencil() const noexcept { return stencil_; }

 private:
  std::size_t stencil_;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, long step = -1)
      : std::runtime_error(what), step_(step) {}

  /// Time step at which the failure happened, or -1 for steady solves.
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace rbfshape
