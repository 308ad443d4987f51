#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpa {

enum class ErrorCode {
  // numerics
  DuplicateNodes,
  NoConvergence,
  DegenerateLeading,
  ZeroDivisor,
  // scheme
  InvalidParams,
  NoConstraints,
  InfeasibleCgeK,
  InfeasibleTrivialKernel,
  GenericityExhausted,
  NotInKernel,
  DisjointnessViolated,
  RepeatedRoots,
  TooLarge,
  OutOfRegime,
  InvalidRegime,
  // pipeline
  DimensionMismatch,
  MissingResponses,
  SchemeNotValidated,
  InsufficientResponses,
  NonScalarData,
  // simulator
  WorkerLoss,
  // experiments
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cpa
