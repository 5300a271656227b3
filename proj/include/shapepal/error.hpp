#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shapepal {

/// Broad failure classes. Each maps to one exit code / HTTP status at the
/// service boundary.
enum class ErrorKind {
  Parse,
  Validation,
  Domain,
  Contract,
  Infeasible,
  Generation,
  Planning,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse_error";
    case ErrorKind::Validation: return "validation_error";
    case ErrorKind::Domain: return "domain_error";
    case ErrorKind::Contract: return "contract_error";
    case ErrorKind::Infeasible: return "infeasible_error";
    case ErrorKind::Generation: return "generation_error";
    case ErrorKind::Planning: return "planning_error";
    case ErrorKind::Io: return "io_error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& m, long line = -1)
      : Error(ErrorKind::Parse, line >= 0 ? "line " + std::to_string(line) + ": " + m : m),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m) : Error(ErrorKind::Validation, m) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error(ErrorKind::Domain, m) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& m) : Error(ErrorKind::Contract, m) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& m) : Error(ErrorKind::Infeasible, m) {}
};

/// Stimulus generation gave up after `attempts` resamples.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& m, long attempts)
      : Error(ErrorKind::Generation, m + " after " + std::to_string(attempts) + " attempts"),
        attempts_(attempts) {}
  long attempts() const noexcept { return attempts_; }

 private:
  long attempts_;
};

class PlanningError : public Error {
 public:
  explicit PlanningError(const std::string& m) : Error(ErrorKind::Planning, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorKind::Io, m) {}
};

}  // namespace shapepal
