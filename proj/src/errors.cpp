#include "xlat/errors.hpp"

#include <sstream>

namespace xlat {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::NonPositiveReference: return "NonPositiveReference";
    case ErrorCode::DuplicateResonance: return "DuplicateResonance";
    case ErrorCode::EmptyDesign: return "EmptyDesign";
    case ErrorCode::InfeasibleBounds: return "InfeasibleBounds";
    case ErrorCode::MalformedOptionLine: return "MalformedOptionLine";
    case ErrorCode::NonMonotoneFrequency: return "NonMonotoneFrequency";
    case ErrorCode::UnsupportedParameter: return "UnsupportedParameter";
    case ErrorCode::ComplexReferenceUnsupported: return "ComplexReferenceUnsupported";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SingularConversion: return "SingularConversion";
    case ErrorCode::FloatingNode: return "FloatingNode";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::InfeasibleMatch: return "InfeasibleMatch";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::NonPositiveMatchResistance: return "NonPositiveMatchResistance";
    case ErrorCode::UnilateralNetwork: return "UnilateralNetwork";
    case ErrorCode::NoPassband: return "NoPassband";
    case ErrorCode::BandTouchesSweepEdge: return "BandTouchesSweepEdge";
    case ErrorCode::InsufficientPeaks: return "InsufficientPeaks";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::PassivityViolation: return "PassivityViolation";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
  }
  return "Unknown";
}

bool is_validation(ErrorCode code) noexcept {
  return static_cast<int>(code) <= static_cast<int>(ErrorCode::IoError);
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::string floating_message(int node, std::optional<double> f) {
  std::ostringstream os;
  os << "node " << node << " has no admittance path to the rest of the network";
  if (f) os << " at f = " << *f << " Hz";
  return os.str();
}

}  // namespace

FloatingNodeError::FloatingNodeError(int node, std::optional<double> frequency_hz)
    : Error(ErrorCode::FloatingNode, floating_message(node, frequency_hz)),
      node_(node),
      frequency_hz_(frequency_hz) {}

InfeasibleMatchError::InfeasibleMatchError(double rollett_k)
    : Error(ErrorCode::InfeasibleMatch,
            "no simultaneous conjugate match exists (Rollett K = " + std::to_string(rollett_k) + ")"),
      rollett_k_(rollett_k) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace xlat
