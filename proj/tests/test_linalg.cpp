#include <doctest.h>

#include "axecv/error.hpp"
#include "axecv/linalg.hpp"
#include "oracles.hpp"

using namespace axecv;

namespace {

VarianceEstimates plug(const MatrixXd& sigma, double tau) {
  VarianceEstimates v;
  v.sigma = sigma;
  v.tau = tau;
  return v;
}

// Single observation, intercept-free: X1 has no columns.
ModelSpec scalar_model(double y) {
  ModelSpec s;
  s.x1 = MatrixXd::Zero(1, 0);
  s.x2 = MatrixXd::Ones(1, 1);
  s.prior_cov = MatrixXd::Zero(0, 0);
  s.cov = CovarianceStructure::diagonal(1, 1.0);
  s.response = VectorXd::Constant(1, y);
  return s;
}

}  // namespace

TEST_CASE("conditional posterior mean, scalar shrinkage") {
  const auto fit = conditional_posterior_mean(scalar_model(2.0), plug(MatrixXd::Ones(1, 1), 1.0));
  CHECK(fit(0) == doctest::Approx(2.0 * 1.0 / (1.0 + 1.0)).epsilon(1e-14));
  const auto fit2 = conditional_posterior_mean(scalar_model(2.0), plug(MatrixXd::Constant(1, 1, 3.0), 0.5));
  CHECK(fit2(0) == doctest::Approx(2.0 * 3.0 / (3.0 + 0.25)).epsilon(1e-14));
}

TEST_CASE("conditional posterior mean tends to OLS as Sigma grows") {
  auto ow = oracle::one_way(4, 3, 1.0, 1.0, 17, 1);
  ow.spec.prior_infinite = true;
  const auto fit = conditional_posterior_mean(ow.spec, plug(1e12 * MatrixXd::Identity(4, 4), 1.0));
  // [X1 X2] is rank-deficient (intercept = sum of one-hots); OLS fitted values
  // are the projection onto the column span, by normal equations on a basis.
  MatrixXd basis(12, 5);
  basis << ow.spec.x1.col(1), ow.spec.x2;
  const MatrixXd g = oracle::mul(oracle::t(basis), basis);
  const VectorXd coef = oracle::mul(oracle::inverse(g), oracle::mul(oracle::t(basis), ow.spec.response));
  const VectorXd ols = oracle::mul(basis, coef);
  CHECK(((fit - ols).cwiseAbs().array() <= 1e-4 * ols.cwiseAbs().array().max(1.0)).all());
}

TEST_CASE("conditional posterior mean is linear in Y") {
  auto ow = oracle::one_way(3, 2, 1.0, 1.0, 2);
  ow.spec.response.setZero();
  const auto fit = conditional_posterior_mean(ow.spec, plug(MatrixXd::Identity(3, 3), 1.0));
  CHECK(fit.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conditional posterior mean matches the definition") {
  auto ow = oracle::one_way(5, 3, 0.8, 1.0, 9, 2);
  ow.spec.prior_infinite = false;
  ow.spec.prior_cov = 10 * MatrixXd::Identity(3, 3);
  const MatrixXd sigma = 0.7 * MatrixXd::Identity(5, 5);
  const auto fit = conditional_posterior_mean(ow.spec, plug(sigma, 1.3));
  const MatrixXd x = ow.spec.design();
  const MatrixXd a = oracle::prior_precision(ow.spec, sigma) + oracle::mul(oracle::t(x), x) / 1.69;
  const VectorXd expect = oracle::mul(x, oracle::mul(oracle::inverse(a), oracle::mul(oracle::t(x), ow.spec.response))) / 1.69;
  CHECK((fit - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("smoother eigenvalues lie in [0, 1]") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto li = oracle::downdate_instance(seed);
    const auto cp = conditional_posterior(li.spec, li.var);
    const MatrixXd h = cp.smoother();
    // symmetric because P = tau^2 I
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (h + h.transpose()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK(es.eigenvalues().maxCoeff() <= 1 + 1e-10);
    Eigen::SelfAdjointEigenSolver<MatrixXd> ev(cp.v);
    CHECK(ev.eigenvalues().minCoeff() > 0);
  }
}

TEST_CASE("downdate_v examples") {
  // X = [1;1], tau = 1, Sigma = [1]: V = (2 + 1)^-1
  const MatrixXd v = MatrixXd::Constant(1, 1, 1.0 / 3);
  const MatrixXd x = VectorXd::Ones(1);
  CHECK(downdate_v(v, x, 1, 1.0)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(downdate_v(v, x, 0, 1.0) == v);
  MatrixXd v2(2, 2);
  v2 << 2, 0.5, 0.5, 1;
  CHECK(downdate_v(v2, VectorXd::Zero(2), 3, 1.0) == v2);
  // 1 - 3 * (1/3) = 0
  CHECK_THROWS_AS(downdate_v(v, x, 3, 1.0), Error);
  try {
    downdate_v(v, x, 3, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SingularDowndate);
  }
}

TEST_CASE("block downdate matches direct inversion") {
  auto ow = oracle::one_way(4, 3, 1.0, 1.0, 21, 2);
  const auto var = plug(0.9 * MatrixXd::Identity(4, 4), 1.1);
  const auto cp = conditional_posterior(ow.spec, var);
  const IndexSet fold{1, 4, 7, 8};
  const MatrixXd xj = select_rows(cp.design, fold);
  const MatrixXd got = block_downdate(cp.v, xj, VectorXd::Constant(4, 1.21));
  MatrixXd train = oracle::prior_precision(ow.spec, var.sigma);
  const MatrixXd x = cp.design;
  const auto m = oracle::mask(fold, x.rows());
  for (Index r = 0; r < x.rows(); ++r)
    if (!m[static_cast<std::size_t>(r)]) train += x.row(r).transpose() * x.row(r) / 1.21;
  const MatrixXd expect = oracle::inverse(train);
  CHECK((got - expect).norm() / expect.norm() < 1e-10);
}

TEST_CASE("fold statistics") {
  ModelSpec s;
  s.x1 = MatrixXd::Ones(4, 1);
  s.x2 = MatrixXd::Zero(4, 2);
  s.x2(0, 0) = s.x2(1, 0) = s.x2(2, 1) = s.x2(3, 1) = 1;
  s.prior_infinite = true;
  s.prior_cov = MatrixXd::Identity(1, 1);
  s.cov = CovarianceStructure::diagonal(2, 1.0);
  s.response = VectorXd(4);
  s.response << 1, 0, 2, 4;
  const auto var = plug(MatrixXd::Identity(2, 2), 1.0);
  const auto st = fold_statistics(s, var, {2, 3});
  CHECK(st.ybar == doctest::Approx(3.0));
  CHECK(st.n == 2);
  const auto fit = conditional_posterior_mean(s, var);
  CHECK(st.ytilde == doctest::Approx(fit(2)).epsilon(1e-12));
  CHECK(st.ebar == doctest::Approx(3.0 - fit(2)).epsilon(1e-12));
  // independent: nu = x' V x with V from Gauss-Jordan
  const MatrixXd x = s.design();
  const MatrixXd v = oracle::inverse(oracle::mul(oracle::t(x), x) + oracle::prior_precision(s, var.sigma));
  CHECK(st.nu == doctest::Approx(st.x.dot(v * st.x)).epsilon(1e-12));

  // Exact fit: Y in the span of X and Sigma huge, so the fitted mean equals Y
  s.response << 1, 1, 5, 5;
  const auto exact = fold_statistics(s, plug(1e12 * MatrixXd::Identity(2, 2), 1.0), {2, 3});
  CHECK(std::abs(exact.ebar) < 1e-8);

  CHECK_THROWS_AS(fold_statistics(s, var, {1, 2}), Error);
  try {
    fold_statistics(s, var, {1, 2});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::HeterogeneousFoldRows);
  }
}

TEST_CASE("downdate identities on random instances") {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto e = oracle::downdate_errors(oracle::downdate_instance(seed));
    CHECK(e.item1 < 1e-8);
    CHECK(e.item2 >= -1e-10);
    CHECK(e.item3 <= 1 + 1e-12);
    CHECK(e.item4 < 1e-8);
    CHECK(e.item5 < 1e-8);
    CHECK(e.item6 < 1e-8);
  }
}

TEST_CASE("residual identity on a 5x3 system") {
  // two clusters (sizes 3, 2) with a cluster-level covariate; X is 5 x 3
  ModelSpec s;
  s.x1.resize(5, 2);
  s.x1 << 1, 0.4, 1, 0.4, 1, 0.4, 1, -1.1, 1, -1.1;
  s.x2 = MatrixXd::Zero(5, 1);
  s.x2(0, 0) = s.x2(1, 0) = s.x2(2, 0) = 1;
  s.prior_cov = 4 * MatrixXd::Identity(2, 2);
  s.cov = CovarianceStructure::diagonal(1, 1.0);
  s.response = VectorXd(5);
  s.response << 0.3, -1.2, 2.2, 0.9, 1.7;
  oracle::DowndateInstance li{s, plug(MatrixXd::Constant(1, 1, 0.6), 0.8), {3, 4}};
  CHECK(oracle::downdate_errors(li).item6 < 1e-8);
  li.fold = {0, 1, 2};
  CHECK(oracle::downdate_errors(li).item6 < 1e-8);
}

TEST_CASE("condition_on_rest") {
  MatrixXd sigma(2, 2);
  sigma << 1, 0.5, 0.5, 1;
  const auto cg = condition_on_rest(sigma, {0});
  CHECK(cg.rest == IndexSet{1});
  CHECK(cg.coef(0, 0) == doctest::Approx(0.5));
  CHECK(cg.cov(0, 0) == doctest::Approx(0.75));
  const auto all = condition_on_rest(sigma, {0, 1});
  CHECK(all.coef.cols() == 0);
  CHECK(all.cov == sigma);
  const auto diag = condition_on_rest(MatrixXd::Identity(3, 3) * 2, {1});
  CHECK(diag.coef.cwiseAbs().maxCoeff() == 0.0);
  CHECK(diag.cov(0, 0) == 2.0);
}

TEST_CASE("held-out columns") {
  auto ow = oracle::one_way(3, 2, 1.0, 1.0, 1);
  CHECK(held_out_columns(ow.spec, {2, 3}) == IndexSet{1});
  CHECK(held_out_columns(ow.spec, {2}).empty());
  CHECK(held_out_columns(ow.spec, {0, 1, 4, 5}) == (IndexSet{0, 2}));
}
