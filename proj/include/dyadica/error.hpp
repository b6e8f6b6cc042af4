#pragma once

#include <stdexcept>
#include <string>

namespace dyadica {

enum class Errc {
  NonSymmetric,
  NegativeDistance,
  ZeroOffDiagonal,
  NonPositiveRadius,
  UnknownKind,
  BadParams,
  PropertyViolation,
  CoverageIncomplete,
  OutOfRange,
  SamePoint,
  NotCovered,
  MixedSystems,
  Unsatisfiable,
  BadExponents,
  EmptyBallMass,
  Unbounded,
  EstimateViolated,
  FormMismatch,
  BadM,
  SandwichViolated,
  EquivalenceViolated,
  DualityViolated,
  PointCubeViolated,
  Infinite,
  NonPositiveOperator,
  LowerBoundViolated,
  InfiniteTesting,
  PrincipleViolated,
  HypothesisViolated,
  BoundViolated,
  NotAbsolutelyContinuous,
  ConfigError,
};

const char* errc_name(Errc code) noexcept;

// Every failure raised by the library carries a code and a witness message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& witness);
  Errc code() const noexcept { return code_; }
  const std::string& witness() const noexcept { return witness_; }

 private:
  Errc code_;
  std::string witness_;
};

[[noreturn]] void raise(Errc code, const std::string& witness);

}  // namespace dyadica
