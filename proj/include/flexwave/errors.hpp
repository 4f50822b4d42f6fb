#pragma once

#include <stdexcept>
#include <string>

namespace flexwave {

enum class ErrorKind {
  Domain,      // argument outside the admissible set
  Config,      // malformed or inconsistent configuration
  Solver,      // iteration failed to bracket or converge
  Validation,  // an internal cross-check failed (implementation defect)
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(ErrorKind::Solver, what) {}
};

// Iterative solve hit its cap; carries the last residual.
class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : SolverError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

const char* to_string(ErrorKind kind);

}  // namespace flexwave
