#include "predism/error.hpp"

namespace predism {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedWkt: return "MalformedWkt";
    case ErrorCode::MalformedImage: return "MalformedImage";
    case ErrorCode::EmptyFootprint: return "EmptyFootprint";
    case ErrorCode::NoValidFootprints: return "NoValidFootprints";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::NegativeValue: return "NegativeValue";
    case ErrorCode::NoAttributes: return "NoAttributes";
    case ErrorCode::NonMonotoneRow: return "NonMonotoneRow";
    case ErrorCode::IncompleteRow: return "IncompleteRow";
    case ErrorCode::MalformedLabelFile: return "MalformedLabelFile";
    case ErrorCode::UnknownDamageClass: return "UnknownDamageClass";
    case ErrorCode::UnknownDisasterType: return "UnknownDisasterType";
    case ErrorCode::UnclassifiedNotMappable: return "UnclassifiedNotMappable";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::MixedDisasterTypesInEvent: return "MixedDisasterTypesInEvent";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonMonotoneCutPoints: return "NonMonotoneCutPoints";
    case ErrorCode::NoBackboneAvailable: return "NoBackboneAvailable";
    case ErrorCode::DegenerateDataset: return "DegenerateDataset";
    case ErrorCode::BackboneFailure: return "BackboneFailure";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::MissingGeoBounds: return "MissingGeoBounds";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::BackendStartupFailure: return "BackendStartupFailure";
    case ErrorCode::PortUnavailable: return "PortUnavailable";
    case ErrorCode::MalformedRequest: return "MalformedRequest";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_domain_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::BackboneFailure:
    case ErrorCode::BackendStartupFailure:
    case ErrorCode::PortUnavailable:
    case ErrorCode::IoError:
    case ErrorCode::MalformedRequest:
    case ErrorCode::NotFound:
      return false;
    default:
      return true;
  }
}

}  // namespace predism
