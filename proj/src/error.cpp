#include "deforcge/error.hpp"

namespace deforcge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ZeroLine: return "ZeroLine";
    case ErrorCode::ShareOutOfRange: return "ShareOutOfRange";
    case ErrorCode::MissingLinkage: return "MissingLinkage";
    case ErrorCode::MissingLandUse: return "MissingLandUse";
    case ErrorCode::NegativeHectares: return "NegativeHectares";
    case ErrorCode::UnmappedCrop: return "UnmappedCrop";
    case ErrorCode::ZeroTotalArea: return "ZeroTotalArea";
    case ErrorCode::LinkageCycle: return "LinkageCycle";
    case ErrorCode::MissingLinkageTarget: return "MissingLinkageTarget";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NegativeDisposableIncome: return "NegativeDisposableIncome";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnbalancedSAM: return "UnbalancedSAM";
    case ErrorCode::MissingElasticity: return "MissingElasticity";
    case ErrorCode::InconsistentFactorData: return "InconsistentFactorData";
    case ErrorCode::UnsupportedStructure: return "UnsupportedStructure";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::TargetInfeasible: return "TargetInfeasible";
    case ErrorCode::MissingCoefficient: return "MissingCoefficient";
    case ErrorCode::InconsistentDrivers: return "InconsistentDrivers";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::CapUnreachable: return "CapUnreachable";
    case ErrorCode::MismatchedTrajectories: return "MismatchedTrajectories";
    case ErrorCode::NotDisaggregated: return "NotDisaggregated";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace deforcge
