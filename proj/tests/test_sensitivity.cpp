/*
 Copyright 2026 The sensaug Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sensaug/pendulum.hpp"
#include "sensaug/problems.hpp"
#include "sensaug/sensitivity.hpp"
#include "sensaug/sqp.hpp"

using namespace sensaug;

namespace {

PrimalDualPoint solved(const ParametricNLP& nlp, const Eigen::VectorXd& p) {
  SolveResult r = solve(nlp, p, std::nullopt, SolverConfig{});
  REQUIRE(r.status == SolveStatus::converged);
  return r.point;
}

}  // namespace

TEST_CASE("sensitivity on ORACLE-EQP is the hand-solved (1/2, 1/2, -1/2)") {
  auto nlp = make_oracle_eqp();
  PrimalDualPoint s = solved(*nlp, Eigen::VectorXd::Constant(1, 1.0));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  REQUIRE(H.H.rows() == 3);
  REQUIRE(H.H.cols() == 1);
  CHECK(H.H(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(H.H(1, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(H.H(2, 0) == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("sensitivity on the active ORACLE-INEQ branch: dw/dp=0, dmu/dp=2") {
  auto nlp = make_oracle_ineq();
  PrimalDualPoint s = solved(*nlp, Eigen::VectorXd::Constant(1, 2.0));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  REQUIRE(H.H.rows() == 2);
  CHECK(H.H(0, 0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(H.H(1, 0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("sensitivity on the inactive ORACLE-INEQ branch: dw/dp=1") {
  auto nlp = make_oracle_ineq();
  PrimalDualPoint s = solved(*nlp, Eigen::VectorXd::Constant(1, 0.3));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  REQUIRE(H.H.rows() == 1);
  CHECK(H.H(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sensitivity refuses irregular points") {
  auto nlp = make_oracle_ineq();
  PrimalDualPoint s;  // weak complementarity at the kink
  s.w = Eigen::VectorXd::Constant(1, 1.0);
  s.lambda = Eigen::VectorXd(0);
  s.mu = Eigen::VectorXd::Constant(1, 2e-12);
  s.p = Eigen::VectorXd::Constant(1, 1.0 + 1e-12);
  s.active_set = {0};
  CHECK_THROWS_AS((void)sensitivity_matrix(*nlp, s), RegularityError);
}

TEST_CASE("predictor is exact on the affine EQP manifold") {
  auto nlp = make_oracle_eqp();
  PrimalDualPoint s = solved(*nlp, Eigen::VectorXd::Constant(1, 1.0));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);

  PrimalDualPoint zero = predict(s, H, Eigen::VectorXd::Zero(1));
  CHECK((zero.w - s.w).norm() == 0.0);
  CHECK((zero.lambda - s.lambda).norm() == 0.0);

  PrimalDualPoint hat = predict(s, H, Eigen::VectorXd::Constant(1, 0.4));
  CHECK(hat.w[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(hat.w[1] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(hat.lambda[0] == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(hat.kind == PointKind::augmented);
  CHECK(hat.active_set == s.active_set);
}

TEST_CASE("predictor on the active INEQ branch tracks mu linearly") {
  auto nlp = make_oracle_ineq();
  PrimalDualPoint s = solved(*nlp, Eigen::VectorXd::Constant(1, 2.0));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  PrimalDualPoint hat = predict(s, H, Eigen::VectorXd::Constant(1, 0.5));
  CHECK(hat.w[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(hat.mu[0] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("pendulum sensitivity columns match finite differences of re-solves") {
  MpcSpec spec;
  spec.N = 10;
  auto nlp = build_pendulum_nlp({}, spec);
  PrimalDualPoint s = solved(*nlp, Eigen::Vector2d(2.5, 0.5));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  const double h = 1e-5;
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e[j] = h;
    PrimalDualPoint plus = solved(*nlp, s.p + e);
    PrimalDualPoint minus = solved(*nlp, s.p - e);
    REQUIRE(plus.active_set == s.active_set);
    Eigen::VectorXd fd = (plus.w - minus.w) / (2 * h);
    Eigen::VectorXd col = H.H.col(j).head(nlp->n_w);
    CHECK((col - fd).lpNorm<Eigen::Infinity>() <=
          1e-4 * std::max(1.0, fd.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("corrector: already-exact input returns unchanged in 0 iterations") {
  auto nlp = make_oracle_eqp();
  PrimalDualPoint s = solved(*nlp, Eigen::VectorXd::Constant(1, 1.0));
  CorrectorResult r = correct(*nlp, s, CorrectorConfig{});
  CHECK(r.status == CorrectorStatus::converged);
  CHECK(r.iterations == 0);
  CHECK((r.point.w - s.w).norm() == 0.0);
}

TEST_CASE("corrector: one Newton step is exact on the linear-quadratic EQP") {
  auto nlp = make_oracle_eqp();
  PrimalDualPoint s = solved(*nlp, Eigen::VectorXd::Constant(1, 1.0));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  // Perturb the predicted point so a correction is actually needed.
  PrimalDualPoint hat = predict(s, H, Eigen::VectorXd::Constant(1, 0.4));
  hat.w[0] += 1e-3;
  CorrectorResult r = correct(*nlp, hat, CorrectorConfig{});
  CHECK(r.status == CorrectorStatus::converged);
  CHECK(r.iterations == 1);
  CHECK(r.point.w[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(r.final_residual <= 1e-12);
}

TEST_CASE("corrector flags active-set change past the INEQ kink") {
  auto nlp = make_oracle_ineq();
  PrimalDualPoint s = solved(*nlp, Eigen::VectorXd::Constant(1, 0.5));  // A empty
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  PrimalDualPoint hat = predict(s, H, Eigen::VectorXd::Constant(1, 1.0));  // p=1.5 > 1
  CorrectorResult r = correct(*nlp, hat, CorrectorConfig{});
  CHECK(r.status == CorrectorStatus::active_set_changed);
}

TEST_CASE("validate_active_set per spec examples") {
  auto nlp = make_oracle_ineq();
  PrimalDualPoint active = solved(*nlp, Eigen::VectorXd::Constant(1, 2.0));
  SensitivityMatrix H = sensitivity_matrix(*nlp, active);
  PrimalDualPoint hat = predict(active, H, Eigen::VectorXd::Constant(1, 0.5));
  CorrectorResult r = correct(*nlp, hat, CorrectorConfig{});
  REQUIRE(r.status == CorrectorStatus::converged);
  CHECK(validate_active_set(*nlp, r.point, kDefaultActivityTol) == ActiveSetValidity::valid);

  PrimalDualPoint inactive = solved(*nlp, Eigen::VectorXd::Constant(1, 0.5));
  SensitivityMatrix Hi = sensitivity_matrix(*nlp, inactive);
  PrimalDualPoint crossed = predict(inactive, Hi, Eigen::VectorXd::Constant(1, 1.0));
  CHECK(validate_active_set(*nlp, crossed, kDefaultActivityTol) ==
        ActiveSetValidity::changed);
  CHECK(validate_active_set(*nlp, inactive, kDefaultActivityTol) ==
        ActiveSetValidity::valid);
}

TEST_CASE("pendulum corrector: grid-cell predictions converge in few iterations") {
  MpcSpec spec;
  spec.N = 10;
  auto nlp = build_pendulum_nlp({}, spec);
  PrimalDualPoint s = solved(*nlp, Eigen::Vector2d(1.2, 0.8));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  Eigen::Vector2d dp(0.1, 0.1);  // stays within the anchor cell's active-set region
  CorrectorResult r = correct(*nlp, predict(s, H, dp), CorrectorConfig{});
  REQUIRE(r.status == CorrectorStatus::converged);
  CHECK(r.iterations <= 4);
  CHECK(r.point.stationarity_norm <= 1e-6);
}

TEST_CASE("sensitivity linear-solve residual is tiny") {
  MpcSpec spec;
  spec.N = 10;
  auto nlp = build_pendulum_nlp({}, spec);
  PrimalDualPoint s = solved(*nlp, Eigen::Vector2d(3.0, -1.0));
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  Eigen::MatrixXd rhs = -kkt_rhs_p(*nlp, s);
  CHECK(H.kkt_factorization->residual(H.H, rhs) <= 1e-10);
}
