#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace predism {

/// Error taxonomy shared by the library, CLI exit codes and HTTP status mapping.
enum class ErrorCode {
  // geometry / imagery
  MalformedWkt,
  MalformedImage,
  EmptyFootprint,
  NoValidFootprints,
  // hazard scoring
  UnknownAttribute,
  NegativeValue,
  NoAttributes,
  NonMonotoneRow,
  IncompleteRow,
  // dataset ingestion
  MalformedLabelFile,
  UnknownDamageClass,
  UnknownDisasterType,
  UnclassifiedNotMappable,
  EmptyCatalog,
  MixedDisasterTypesInEvent,
  InsufficientData,
  // model
  NonMonotoneCutPoints,
  NoBackboneAvailable,
  DegenerateDataset,
  BackboneFailure,
  MalformedModel,
  // maps / evaluation
  MissingGeoBounds,
  IdMismatch,
  // service
  InvalidConfig,
  BackendStartupFailure,
  PortUnavailable,
  MalformedRequest,
  NotFound,
  IoError,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

/// Whether the failure is caused by the caller's data (as opposed to a
/// backend or the environment).
bool is_domain_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace predism
