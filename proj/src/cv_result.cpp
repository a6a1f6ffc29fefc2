#include "axecv/cv_result.hpp"

#include <cstring>

#include "axecv/error.hpp"

namespace axecv {

namespace {

constexpr Method kAllMethods[] = {Method::axe, Method::ghost, Method::iis_c,
                                  Method::iis_a, Method::mcv, Method::naive};

bool same_bits(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

bool same_bits(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::memcmp(&*a, &*b, sizeof(double)) == 0;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::axe: return "axe";
    case Method::ghost: return "ghost";
    case Method::iis_c: return "iis_c";
    case Method::iis_a: return "iis_a";
    case Method::mcv: return "mcv";
    case Method::naive: return "naive";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  std::string valid;
  for (Method m : kAllMethods) {
    if (!valid.empty()) valid += ", ";
    valid += to_string(m);
  }
  fail(Errc::UnknownMethod, "unknown method '" + std::string(name) + "'; valid methods: " + valid);
}

std::vector<Method> parse_methods(std::string_view comma_list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= comma_list.size()) {
    const auto end = comma_list.find(',', start);
    const auto token = comma_list.substr(start, end == std::string_view::npos ? end : end - start);
    if (!token.empty()) out.push_back(parse_method(token));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (out.empty()) fail(Errc::InvalidArgument, "method list is empty");
  return out;
}

bool identical(const CvResult& a, const CvResult& b) {
  if (a.method != b.method || a.folds.size() != b.folds.size()) return false;
  if (a.meta.plug_in != b.meta.plug_in || a.meta.seed != b.meta.seed ||
      a.meta.detail != b.meta.detail) {
    return false;
  }
  for (std::size_t i = 0; i < a.folds.size(); ++i) {
    const auto& fa = a.folds[i];
    const auto& fb = b.folds[i];
    if (fa.fold_id != fb.fold_id || fa.rows != fb.rows) return false;
    if (!same_bits(fa.predicted, fb.predicted)) return false;
    if (fa.weights.has_value() != fb.weights.has_value()) return false;
    if (fa.weights && !same_bits(*fa.weights, *fb.weights)) return false;
    if (!same_bits(fa.khat, fb.khat) || !same_bits(fa.ess, fb.ess)) return false;
  }
  return true;
}

}  // namespace axecv
