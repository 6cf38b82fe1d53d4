#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace moran {

enum class ErrorCode {
  // malformed or invalid input documents
  MalformedLine,
  SelfLoop,
  DuplicateEdge,
  Disconnected,
  InvalidSize,
  MalformedRational,
  MalformedDocument,
  FitnessBelowOne,
  DuplicateTypeName,
  UnknownOrdinary,
  UnknownType,
  // requests that do not satisfy an operation's preconditions
  InvalidArgument,
  NotNeighbours,
  SingleType,
  TooFewVertices,
  OracleReturnedInvalidState,
  NotEnumerable,
  AbsorbedState,
  UndefinedBound,
  DegenerateRatio,
  HypothesisViolated,
  NotMaximal,
  WeightOverflow,
  // capacity
  StateSpaceTooLarge,
};

enum class ErrorCategory { Input, Config, Capacity };

constexpr ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedLine:
    case ErrorCode::SelfLoop:
    case ErrorCode::DuplicateEdge:
    case ErrorCode::Disconnected:
    case ErrorCode::InvalidSize:
    case ErrorCode::MalformedRational:
    case ErrorCode::MalformedDocument:
    case ErrorCode::FitnessBelowOne:
    case ErrorCode::DuplicateTypeName:
    case ErrorCode::UnknownOrdinary:
      return ErrorCategory::Input;
    case ErrorCode::StateSpaceTooLarge:
      return ErrorCategory::Capacity;
    default:
      return ErrorCategory::Config;
  }
}

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::MalformedRational: return "MalformedRational";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::FitnessBelowOne: return "FitnessBelowOne";
    case ErrorCode::DuplicateTypeName: return "DuplicateTypeName";
    case ErrorCode::UnknownOrdinary: return "UnknownOrdinary";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotNeighbours: return "NotNeighbours";
    case ErrorCode::SingleType: return "SingleType";
    case ErrorCode::TooFewVertices: return "TooFewVertices";
    case ErrorCode::OracleReturnedInvalidState: return "OracleReturnedInvalidState";
    case ErrorCode::NotEnumerable: return "NotEnumerable";
    case ErrorCode::AbsorbedState: return "AbsorbedState";
    case ErrorCode::UndefinedBound: return "UndefinedBound";
    case ErrorCode::DegenerateRatio: return "DegenerateRatio";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NotMaximal: return "NotMaximal";
    case ErrorCode::WeightOverflow: return "WeightOverflow";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
  }
  return "Unknown";
}

/// Every library failure is reported as an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace moran
