#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "axecv/dense.hpp"
#include "axecv/model.hpp"

namespace axecv {

/// `naive` is the full-data posterior mean at the test rows (no refit, no
/// reweighting); it serves as the no-cross-validation reference.
enum class Method { axe, ghost, iis_c, iis_a, mcv, naive };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);
std::vector<Method> parse_methods(std::string_view comma_list);

struct FoldPrediction {
  std::size_t fold_id = 0;
  IndexSet rows;
  VectorXd predicted;
  std::optional<VectorXd> weights;
  std::optional<double> khat;
  std::optional<double> ess;
};

struct CvMeta {
  PlugInSource plug_in = PlugInSource::external;
  std::uint64_t seed = 0;
  std::string detail;
};

struct CvResult {
  Method method = Method::axe;
  std::vector<FoldPrediction> folds;
  CvMeta meta;
};

/// Bitwise equality of everything stored in the two results.
bool identical(const CvResult& a, const CvResult& b);

}  // namespace axecv
