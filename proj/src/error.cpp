#include "axecv/error.hpp"

namespace axecv {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NoInterceptSpan: return "NoInterceptSpan";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::MissingLabels: return "MissingLabels";
    case Errc::BadK: return "BadK";
    case Errc::EmptyFold: return "EmptyFold";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::SingularDowndate: return "SingularDowndate";
    case Errc::HeterogeneousFoldRows: return "HeterogeneousFoldRows";
    case Errc::NonpositiveRate: return "NonpositiveRate";
    case Errc::BadPriors: return "BadPriors";
    case Errc::BadConfig: return "BadConfig";
    case Errc::DegenerateWeights: return "DegenerateWeights";
    case Errc::NonFiniteLogDensity: return "NonFiniteLogDensity";
    case Errc::TailFitFailure: return "TailFitFailure";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::ParseError: return "ParseError";
    case Errc::RoleError: return "RoleError";
    case Errc::ManifestMismatch: return "ManifestMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UnknownMethod: return "UnknownMethod";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(Errc code) noexcept {
  switch (code) {
    case Errc::NotPositiveDefinite:
    case Errc::SingularDowndate:
    case Errc::NonpositiveRate:
    case Errc::DegenerateWeights:
    case Errc::NonFiniteLogDensity:
    case Errc::TailFitFailure:
    case Errc::ZeroDenominator:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

Error Error::with_fold(std::size_t fold_id) const {
  std::string msg = what();
  // Strip our own "<Name>: " prefix so it is not doubled.
  const auto prefix = std::string(errc_name(code_)) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  Error tagged(code_, "fold " + std::to_string(fold_id) + ": " + msg);
  tagged.fold_ = fold_id;
  return tagged;
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace axecv
