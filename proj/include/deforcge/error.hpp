#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deforcge {

enum class ErrorCode {
  MalformedRecord,
  DuplicateCell,
  NotConverged,
  ZeroLine,
  ShareOutOfRange,
  MissingLinkage,
  MissingLandUse,
  NegativeHectares,
  UnmappedCrop,
  ZeroTotalArea,
  LinkageCycle,
  MissingLinkageTarget,
  NonPositivePrice,
  DomainError,
  NegativeDisposableIncome,
  DimensionMismatch,
  UnbalancedSAM,
  MissingElasticity,
  InconsistentFactorData,
  UnsupportedStructure,
  SingularJacobian,
  TargetInfeasible,
  MissingCoefficient,
  InconsistentDrivers,
  WindowOutOfRange,
  CapUnreachable,
  MismatchedTrajectories,
  NotDisaggregated,
  InvalidConfig,
  IoError,
  UsageError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; `code()` is stable and
// is what the CLI prints in its machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace deforcge
