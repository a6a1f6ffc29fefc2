#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace axecv {

enum class Errc {
  DimensionMismatch,
  NoInterceptSpan,
  NotPositiveDefinite,
  MissingLabels,
  BadK,
  EmptyFold,
  EmptyTrainingSet,
  SingularDowndate,
  HeterogeneousFoldRows,
  NonpositiveRate,
  BadPriors,
  BadConfig,
  DegenerateWeights,
  NonFiniteLogDensity,
  TailFitFailure,
  ZeroDenominator,
  ParseError,
  RoleError,
  ManifestMismatch,
  InvalidArgument,
  UnknownMethod,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

// Numerical failures map to CLI exit code 2, everything else to 1.
bool is_numerical(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }
  const std::optional<std::size_t>& fold() const noexcept { return fold_; }

  // Copy of this error tagged with the fold it came from.
  Error with_fold(std::size_t fold_id) const;

 private:
  Errc code_;
  std::optional<std::size_t> fold_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace axecv
