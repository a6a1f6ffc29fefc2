#pragma once

// Accuracy of approximate CV predictions against manual cross-validation.
//
//   display     LRR_j = log sum_i (yhat_ij - y_ij)^2 / (yhat^mcv_ij - y_ij)^2
//   rmse-ratio  LRR_j = log sum_i (yhat_ij - y_ij)^2 / sum_i (yhat^mcv_ij - y_ij)^2

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "axecv/cv_result.hpp"
#include "axecv/model.hpp"

namespace axecv {

enum class LrrVariant { display, rmse_ratio };

std::string_view to_string(LrrVariant v) noexcept;
LrrVariant parse_lrr_variant(std::string_view s);

struct LrrReport {
  Method method = Method::axe;
  /// NaN for excluded folds.
  VectorXd per_fold;
  std::vector<std::size_t> excluded;
  double mean = 0.0;
  double sd = 0.0;
  /// Folds with |LRR_j| > 1.
  std::vector<std::size_t> outliers;
};

/// Folds whose MCV error is exactly zero at any point (display) or in total
/// (rmse-ratio) are excluded and listed rather than padded.
LrrReport lrr(const CvResult& approx, const CvResult& mcv, const ModelSpec& spec,
              const FoldPlan& plan, LrrVariant variant = LrrVariant::display);

/// Frobenius norm of the difference.
double sigma_distance(const MatrixXd& a, const MatrixXd& b);

struct LrrSummaryRow {
  Method method = Method::axe;
  std::size_t folds = 0;
  double mean = 0.0;
  double sd = 0.0;
  bool unstable = false;  // sd > 1
};

/// One row per method in order of first appearance; reports for the same
/// method are pooled. SD uses n - 1 (NaN below two folds).
std::vector<LrrSummaryRow> summarize_lrr(const std::vector<LrrReport>& reports);

void write_summary_text(std::ostream& os, const std::vector<LrrSummaryRow>& rows);

/// Sample mean and n-1 standard deviation of the finite entries.
void mean_sd(const VectorXd& v, double& mean, double& sd);

/// Root mean squared error of pooled predictions against the response.
double rmse(const CvResult& result, const ModelSpec& spec);

}  // namespace axecv
