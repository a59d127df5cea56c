#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace duo {

enum class ErrorKind {
  // theory-core
  DuplicateType,
  UnknownType,
  DependentFiducials,
  UnphysicalFiducial,
  SingularMetric,
  SingularTransform,
  // duotensor
  NoSuchPort,
  TypeMismatch,
  ColorClash,
  DirectionMismatch,
  DuplicatePort,
  IndexMismatch,
  MissingMetric,
  // circuit
  CycleCreated,
  PortTaken,
  PortNotOpen,
  InvalidCircuit,
  // backends
  ShapeMismatch,
  UnphysicalZ,
  TraceIncreasing,
  MissingOperation,
  OracleTooLarge,
  // engine
  ValidationFailed,
  NotSameExperiment,
  IncompatibleFoliation,
  // dsl / io
  LexError,
  DuplicateProducer,
  TripleUse,
  TypeClash,
  CycleError,
  FormatError,
};

std::string_view to_string(ErrorKind kind);

/// Domain error raised by every module. `kind()` is the stable, machine
/// readable name used in CLI error objects.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, const std::string& message, int line, int column)
      : Error(kind, message + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace duo
