#pragma once

#include <stdexcept>
#include <string>

namespace mvf {

/// Failure categories. The C API and the CLI map these onto error codes and
/// process exit statuses.
enum class ErrorKind {
  structural,     // mismatched grids, shapes, sample counts, missing checkpoints
  usage,          // operation called with an argument it cannot handle
  compatibility,  // Neumann problem with a non-mean-zero right-hand side
  convergence,    // iterative solver ran out of budget
  step,           // time step rejected (CFL)
  stagnation,     // line search failed
  config,         // invalid run configuration
  io,             // file system or format problem
  check           // a verification check failed
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Convergence failure of an iterative solver; carries the residual reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::convergence, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Error raised while integrating in time; remembers the failing step index.
class StepError : public Error {
 public:
  StepError(ErrorKind kind, const std::string& what, long step)
      : Error(kind, what), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace mvf
