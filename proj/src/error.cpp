#include "dyadica/error.hpp"

namespace dyadica {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonSymmetric: return "NonSymmetric";
    case Errc::NegativeDistance: return "NegativeDistance";
    case Errc::ZeroOffDiagonal: return "ZeroOffDiagonal";
    case Errc::NonPositiveRadius: return "NonPositiveRadius";
    case Errc::UnknownKind: return "UnknownKind";
    case Errc::BadParams: return "BadParams";
    case Errc::PropertyViolation: return "PropertyViolation";
    case Errc::CoverageIncomplete: return "CoverageIncomplete";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::SamePoint: return "SamePoint";
    case Errc::NotCovered: return "NotCovered";
    case Errc::MixedSystems: return "MixedSystems";
    case Errc::Unsatisfiable: return "Unsatisfiable";
    case Errc::BadExponents: return "BadExponents";
    case Errc::EmptyBallMass: return "EmptyBallMass";
    case Errc::Unbounded: return "Unbounded";
    case Errc::EstimateViolated: return "EstimateViolated";
    case Errc::FormMismatch: return "FormMismatch";
    case Errc::BadM: return "BadM";
    case Errc::SandwichViolated: return "SandwichViolated";
    case Errc::EquivalenceViolated: return "EquivalenceViolated";
    case Errc::DualityViolated: return "DualityViolated";
    case Errc::PointCubeViolated: return "PointCubeViolated";
    case Errc::Infinite: return "Infinite";
    case Errc::NonPositiveOperator: return "NonPositiveOperator";
    case Errc::LowerBoundViolated: return "LowerBoundViolated";
    case Errc::InfiniteTesting: return "InfiniteTesting";
    case Errc::PrincipleViolated: return "PrincipleViolated";
    case Errc::HypothesisViolated: return "HypothesisViolated";
    case Errc::BoundViolated: return "BoundViolated";
    case Errc::NotAbsolutelyContinuous: return "NotAbsolutelyContinuous";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& witness)
    : std::runtime_error(std::string(errc_name(code)) + ": " + witness),
      code_(code),
      witness_(witness) {}

void raise(Errc code, const std::string& witness) { throw Error(code, witness); }

}  // namespace dyadica
