#include "axecv/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "axecv/error.hpp"

namespace axecv {

std::string_view to_string(LrrVariant v) noexcept {
  return v == LrrVariant::display ? "display" : "rmse-ratio";
}

LrrVariant parse_lrr_variant(std::string_view s) {
  if (s == "display") return LrrVariant::display;
  if (s == "rmse-ratio") return LrrVariant::rmse_ratio;
  fail(Errc::InvalidArgument, "unknown LRR variant '" + std::string(s) + "' (display, rmse-ratio)");
}

void mean_sd(const VectorXd& v, double& mean, double& sd) {
  double sum = 0.0;
  std::size_t n = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) {
      sum += v(i);
      ++n;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  mean = n ? sum / static_cast<double>(n) : nan;
  if (n < 2) {
    sd = nan;
    return;
  }
  double ss = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) ss += (v(i) - mean) * (v(i) - mean);
  }
  sd = std::sqrt(ss / static_cast<double>(n - 1));
}

LrrReport lrr(const CvResult& approx, const CvResult& mcv, const ModelSpec& spec,
              const FoldPlan& plan, LrrVariant variant) {
  if (approx.folds.size() != plan.size() || mcv.folds.size() != plan.size()) {
    fail(Errc::DimensionMismatch, "results do not cover the fold plan");
  }
  LrrReport rep;
  rep.method = approx.method;
  rep.per_fold.resize(static_cast<Index>(plan.size()));
  for (std::size_t f = 0; f < plan.size(); ++f) {
    const auto& fold = plan.folds[f];
    const auto& a = approx.folds[f];
    const auto& m = mcv.folds[f];
    if (a.predicted.size() != static_cast<Index>(fold.size()) ||
        m.predicted.size() != static_cast<Index>(fold.size())) {
      fail(Errc::DimensionMismatch, "prediction length differs from fold " + std::to_string(f + 1));
    }
    double num = 0.0, den = 0.0, ratio_sum = 0.0;
    bool zero = false;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      const double y = spec.response(fold[i]);
      const double ea = a.predicted(static_cast<Index>(i)) - y;
      const double em = m.predicted(static_cast<Index>(i)) - y;
      num += ea * ea;
      den += em * em;
      if (em == 0.0) zero = true;
      else ratio_sum += ea * ea / (em * em);
    }
    if (variant == LrrVariant::rmse_ratio) zero = den == 0.0;
    if (zero) {
      rep.per_fold(static_cast<Index>(f)) = std::numeric_limits<double>::quiet_NaN();
      rep.excluded.push_back(f);
      continue;
    }
    const double v = std::log(variant == LrrVariant::display ? ratio_sum : num / den);
    rep.per_fold(static_cast<Index>(f)) = v;
    if (std::abs(v) > 1.0) rep.outliers.push_back(f);
  }
  if (!plan.folds.empty() && rep.excluded.size() == plan.size()) {
    fail(Errc::ZeroDenominator, "every fold has an MCV prediction equal to its observation");
  }
  mean_sd(rep.per_fold, rep.mean, rep.sd);
  return rep;
}

double sigma_distance(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(Errc::DimensionMismatch, "Sigma estimates have different shapes");
  }
  return (a - b).norm();
}

std::vector<LrrSummaryRow> summarize_lrr(const std::vector<LrrReport>& reports) {
  std::vector<Method> order;
  std::vector<std::vector<double>> pooled;
  for (const auto& r : reports) {
    std::size_t k = 0;
    while (k < order.size() && order[k] != r.method) ++k;
    if (k == order.size()) {
      order.push_back(r.method);
      pooled.emplace_back();
    }
    for (Index i = 0; i < r.per_fold.size(); ++i) {
      if (std::isfinite(r.per_fold(i))) pooled[k].push_back(r.per_fold(i));
    }
  }
  std::vector<LrrSummaryRow> rows;
  for (std::size_t k = 0; k < order.size(); ++k) {
    LrrSummaryRow row;
    row.method = order[k];
    row.folds = pooled[k].size();
    const VectorXd v = Eigen::Map<const VectorXd>(pooled[k].data(), static_cast<Index>(pooled[k].size()));
    mean_sd(v, row.mean, row.sd);
    row.unstable = std::isfinite(row.sd) && row.sd > 1.0;
    rows.push_back(row);
  }
  return rows;
}

void write_summary_text(std::ostream& os, const std::vector<LrrSummaryRow>& rows) {
  os << std::left << std::setw(8) << "method" << std::right << std::setw(7) << "folds"
     << std::setw(12) << "mean" << std::setw(12) << "sd" << "  flag\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(8) << to_string(r.method) << std::right << std::setw(7) << r.folds
       << std::fixed << std::setprecision(4) << std::setw(12) << r.mean << std::setw(12) << r.sd
       << (r.unstable ? "  unstable" : "") << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

double rmse(const CvResult& result, const ModelSpec& spec) {
  double ss = 0.0;
  std::size_t n = 0;
  for (const auto& f : result.folds) {
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
      const double e = f.predicted(static_cast<Index>(i)) - spec.response(f.rows[i]);
      ss += e * e;
      ++n;
    }
  }
  if (n == 0) fail(Errc::InvalidArgument, "no predictions");
  return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace axecv
