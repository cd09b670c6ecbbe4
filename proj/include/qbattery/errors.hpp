#pragma once

#include <stdexcept>
#include <string>

namespace qb {

enum class ErrorKind {
  DimMismatch,
  NotHermitian,
  CutoffTooSmall,
  TooManyBatteries,
  StepSizeUnderflow,
  DegenerateSteadyState,
  SingularMatrix,
  RequiresResonance,
  OnResonancePole,
  RegimeMismatch,
  NotConverged,
  Unstable,
  ParseError,
  ValidationError,
  InvalidArgument
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by the adaptive integrator; carries the last time reached.
class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(double last_good_time, const std::string& what)
      : Error(ErrorKind::StepSizeUnderflow, what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

// Config diagnostics with a location.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error(ErrorKind::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(ErrorKind::ValidationError, field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::TooManyBatteries: return "TooManyBatteries";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::DegenerateSteadyState: return "DegenerateSteadyState";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::RequiresResonance: return "RequiresResonance";
    case ErrorKind::OnResonancePole: return "OnResonancePole";
    case ErrorKind::RegimeMismatch: return "RegimeMismatch";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::Unstable: return "Unstable";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace qb
