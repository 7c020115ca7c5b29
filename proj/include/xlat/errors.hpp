#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace xlat {

// Every failure raised by the library carries one of these codes. The CLI maps
// validation codes to exit status 2 and numeric codes to exit status 3.
enum class ErrorCode {
  // validation
  InvalidArgument,
  KindMismatch,
  NonPositiveReference,
  DuplicateResonance,
  EmptyDesign,
  InfeasibleBounds,
  MalformedOptionLine,
  NonMonotoneFrequency,
  UnsupportedParameter,
  ComplexReferenceUnsupported,
  SchemaError,
  IoError,
  // numeric
  SingularConversion,
  FloatingNode,
  RootNotBracketed,
  InfeasibleMatch,
  DegenerateDenominator,
  NonPositiveMatchResistance,
  UnilateralNetwork,
  NoPassband,
  BandTouchesSweepEdge,
  InsufficientPeaks,
  NonConvergence,
  PassivityViolation,
  BudgetExhausted,
};

const char* to_string(ErrorCode code) noexcept;
bool is_validation(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the MNA reduction when a node has no admittance path to ground.
class FloatingNodeError : public Error {
 public:
  FloatingNodeError(int node, std::optional<double> frequency_hz);

  int node() const noexcept { return node_; }
  std::optional<double> frequency_hz() const noexcept { return frequency_hz_; }

 private:
  int node_;
  std::optional<double> frequency_hz_;
};

// Raised when no simultaneous conjugate match exists; carries Rollett's K.
class InfeasibleMatchError : public Error {
 public:
  explicit InfeasibleMatchError(double rollett_k);

  double rollett_k() const noexcept { return rollett_k_; }

 private:
  double rollett_k_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace xlat
