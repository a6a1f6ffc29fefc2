#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "axecv/error.hpp"
#include "axecv/model.hpp"
#include "oracles.hpp"

using namespace axecv;

namespace {

ModelSpec tiny() {
  ModelSpec s;
  s.x1 = MatrixXd::Ones(3, 1);
  s.x2 = MatrixXd::Identity(3, 3);
  s.prior_cov = MatrixXd::Constant(1, 1, 100.0);
  s.cov = CovarianceStructure::diagonal(3, 1.0);
  s.response = VectorXd::LinSpaced(3, 0, 2);
  return s;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

void check_partition(const FoldPlan& plan, Index n) {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  std::size_t total = 0;
  for (const auto& f : plan.folds) {
    total += f.size();
    for (Index r : f) seen[static_cast<std::size_t>(r)]++;
  }
  CHECK(total == static_cast<std::size_t>(n));
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

}  // namespace

TEST_CASE("validate_model examples") {
  CHECK_NOTHROW(validate_model(tiny()));

  auto s = tiny();
  s.x1 = MatrixXd::Zero(3, 1);
  CHECK(code_of([&] { validate_model(s); }) == Errc::NoInterceptSpan);

  s = tiny();
  s.x1 = MatrixXd::Ones(3, 2);
  s.x1.col(1) << 1, 2, 3;
  s.prior_cov.resize(2, 2);
  s.prior_cov << 1, 2, 2, 1;
  CHECK(code_of([&] { validate_model(s); }) == Errc::NotPositiveDefinite);

  s = tiny();
  s.response = VectorXd::Zero(4);
  CHECK(code_of([&] { validate_model(s); }) == Errc::DimensionMismatch);

  s = tiny();
  s.cov = CovarianceStructure::diagonal(2, 1.0);
  CHECK(code_of([&] { validate_model(s); }) == Errc::DimensionMismatch);

  s = tiny();
  s.offset = VectorXd::Ones(3);
  (*s.offset)(1) = 0.0;
  CHECK_THROWS_AS(validate_model(s), Error);
}

TEST_CASE("intercept span is checked numerically") {
  // [x, 1 - x] spans the ones vector without containing it
  auto s = tiny();
  s.x1.resize(3, 2);
  s.x1 << 0.2, 0.8, 0.5, 0.5, 0.9, 0.1;
  s.prior_infinite = true;
  CHECK_NOTHROW(validate_model(s));
  s.x1.col(1) << 0.3, 0.1, 0.7;
  CHECK(code_of([&] { validate_model(s); }) == Errc::NoInterceptSpan);
}

TEST_CASE("validate_model is side-effect free") {
  const auto s = tiny();
  auto copy = s;
  validate_model(copy);
  validate_model(copy);
  CHECK(copy.x1 == s.x1);
  CHECK(copy.response == s.response);
}

TEST_CASE("fold plans") {
  const std::vector<long long> labels{1, 1, 2, 2, 2};
  const auto lco = build_fold_plan(FoldScheme::lco, 5, labels);
  REQUIRE(lco.size() == 2);
  CHECK(lco.folds[0] == IndexSet{0, 1});
  CHECK(lco.folds[1] == IndexSet{2, 3, 4});
  CHECK_NOTHROW(validate_fold_plan(lco, 5));

  const auto loo = build_fold_plan(FoldScheme::loo, 3);
  REQUIRE(loo.size() == 3);
  for (Index i = 0; i < 3; ++i) CHECK(loo.folds[static_cast<std::size_t>(i)] == IndexSet{i});

  const auto kf = build_fold_plan(FoldScheme::kfold, 4, std::nullopt, 2, 7);
  REQUIRE(kf.size() == 2);
  CHECK(kf.folds[0].size() == 2);
  CHECK(kf.folds[1].size() == 2);
  check_partition(kf, 4);
  const auto again = build_fold_plan(FoldScheme::kfold, 4, std::nullopt, 2, 7);
  CHECK(again.folds == kf.folds);
}

TEST_CASE("lco groups unsorted labels by value") {
  const std::vector<long long> labels{7, 3, 7, 3, 9};
  const auto plan = build_fold_plan(FoldScheme::lco, 5, labels);
  REQUIRE(plan.size() == 3);
  for (const auto& f : plan.folds) {
    std::set<long long> vals;
    for (Index r : f) vals.insert(labels[static_cast<std::size_t>(r)]);
    CHECK(vals.size() == 1);
  }
  check_partition(plan, 5);
}

TEST_CASE("kfold near-equal sizes") {
  for (int k = 2; k <= 7; ++k) {
    const auto plan = build_fold_plan(FoldScheme::kfold, 23, std::nullopt, k, 99);
    REQUIRE(plan.size() == static_cast<std::size_t>(k));
    std::size_t lo = 1000, hi = 0;
    for (const auto& f : plan.folds) {
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      CHECK(std::is_sorted(f.begin(), f.end()));
    }
    CHECK(hi - lo <= 1);
    check_partition(plan, 23);
  }
}

TEST_CASE("fold plan errors") {
  CHECK(code_of([] { build_fold_plan(FoldScheme::lco, 3); }) == Errc::MissingLabels);
  CHECK(code_of([] { build_fold_plan(FoldScheme::kfold, 3, std::nullopt, 4); }) == Errc::BadK);
  CHECK(code_of([] { build_fold_plan(FoldScheme::kfold, 3, std::nullopt, 1); }) == Errc::BadK);
  CHECK(code_of([] { build_fold_plan(FoldScheme::kfold, 3); }) == Errc::BadK);

  FoldPlan bad;
  bad.scheme = FoldScheme::loo;
  bad.folds = {{0, 1}, {1, 2}};
  CHECK_THROWS_AS(validate_fold_plan(bad, 3), Error);
  bad.folds = {{0}, {1}};
  CHECK_THROWS_AS(validate_fold_plan(bad, 3), Error);
}

TEST_CASE("design, subset, prior precision") {
  auto s = tiny();
  const MatrixXd x = s.design();
  CHECK(x.cols() == 4);
  CHECK(x.col(0) == s.x1.col(0));
  const auto sub = s.subset({0, 2});
  CHECK(sub.n() == 2);
  CHECK(sub.response(1) == s.response(2));
  CHECK(sub.x2.row(1) == s.x2.row(2));

  const MatrixXd sigma = 2.0 * MatrixXd::Identity(3, 3);
  const MatrixXd lam = prior_precision(s, sigma);
  CHECK((lam - oracle::prior_precision(s, sigma)).cwiseAbs().maxCoeff() < 1e-14);
  s.prior_infinite = true;
  CHECK(prior_precision(s, sigma)(0, 0) == 0.0);

  CHECK(noise_variance(s, 2.0) == VectorXd::Constant(3, 4.0));
  s.known_variance = VectorXd::LinSpaced(3, 1, 3);
  CHECK(noise_variance(s, 2.0) == *s.known_variance);
}

TEST_CASE("variance estimates validation") {
  VarianceEstimates v;
  v.sigma = MatrixXd::Identity(2, 2);
  v.tau = 1.0;
  CHECK_NOTHROW(v.validate());
  v.tau = 0.0;
  CHECK_THROWS_AS(v.validate(), Error);
  v.tau = 1.0;
  v.sigma(0, 0) = -1.0;
  CHECK_THROWS_AS(v.validate(), Error);
}

TEST_CASE("scheme names") {
  CHECK(parse_fold_scheme("lco") == FoldScheme::lco);
  CHECK(parse_fold_scheme("kfold") == FoldScheme::kfold);
  CHECK(to_string(FoldScheme::loo) == "loo");
  CHECK_THROWS_AS(parse_fold_scheme("bogus"), Error);
}
