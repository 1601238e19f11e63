#include "magzoll/error.hpp"

namespace magzoll {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::PoleEvaluation: return "PoleEvaluation";
    case ErrorCode::UnboundedDomain: return "UnboundedDomain";
    case ErrorCode::PoleEscape: return "PoleEscape";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::DegenerateSegments: return "DegenerateSegments";
    case ErrorCode::NonContractible: return "NonContractible";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::WindowOverlap: return "WindowOverlap";
    case ErrorCode::NotRotationallySymmetric: return "NotRotationallySymmetric";
    case ErrorCode::ContinuationLost: return "ContinuationLost";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::TorusEulerZero: return "TorusEulerZero";
    case ErrorCode::NonNegativeEuler: return "NonNegativeEuler";
    case ErrorCode::ZeroMeanField: return "ZeroMeanField";
    case ErrorCode::NonpositiveMagneticCurvature: return "NonpositiveMagneticCurvature";
    case ErrorCode::DenominatorNonpositive: return "DenominatorNonpositive";
    case ErrorCode::CrossingNotFound: return "CrossingNotFound";
  }
  return "Unknown";
}

}  // namespace magzoll
