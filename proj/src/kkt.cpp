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

#include "sensaug/kkt.hpp"

#include <Eigen/Eigenvalues>

namespace sensaug {

Eigen::MatrixXd kkt_matrix(const ParametricNLP& nlp, const PrimalDualPoint& s) {
  const int n_a = static_cast<int>(s.active_set.size());
  const int n = nlp.n_w + nlp.n_c + n_a;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  M.topLeftCorner(nlp.n_w, nlp.n_w) = nlp.hess_lagrangian_ww(s.w, s.p, s.lambda, s.mu);
  if (nlp.n_c > 0) {
    const Eigen::MatrixXd Jc = nlp.jac_c_w(s.w, s.p);
    M.block(0, nlp.n_w, nlp.n_w, nlp.n_c) = Jc.transpose();
    M.block(nlp.n_w, 0, nlp.n_c, nlp.n_w) = Jc;
  }
  if (n_a > 0) {
    const Eigen::MatrixXd Jg = nlp.jac_g_w(s.w, s.p);
    for (int k = 0; k < n_a; ++k) {
      const int j = s.active_set[static_cast<std::size_t>(k)];
      M.block(0, nlp.n_w + nlp.n_c + k, nlp.n_w, 1) = Jg.row(j).transpose();
      M.block(nlp.n_w + nlp.n_c + k, 0, 1, nlp.n_w) = Jg.row(j);
    }
  }
  return M;
}

Eigen::MatrixXd kkt_rhs_p(const ParametricNLP& nlp, const PrimalDualPoint& s) {
  const int n_a = static_cast<int>(s.active_set.size());
  Eigen::MatrixXd D(nlp.n_w + nlp.n_c + n_a, nlp.n_p);
  D.topRows(nlp.n_w) = nlp.hess_lagrangian_wp(s.w, s.p, s.lambda, s.mu);
  if (nlp.n_c > 0) D.middleRows(nlp.n_w, nlp.n_c) = nlp.jac_c_p(s.w, s.p);
  if (n_a > 0) {
    const Eigen::MatrixXd Jgp = nlp.jac_g_p(s.w, s.p);
    for (int k = 0; k < n_a; ++k)
      D.row(nlp.n_w + nlp.n_c + k) = Jgp.row(s.active_set[static_cast<std::size_t>(k)]);
  }
  return D;
}

KktFactorization::KktFactorization(Eigen::MatrixXd M) : M_(std::move(M)), lu_(M_) {
  // PartialPivLU has no rank test; probe with the residual of a solve.
  const Eigen::VectorXd probe = Eigen::VectorXd::Ones(M_.rows());
  const Eigen::VectorXd x = lu_.solve(probe);
  singular_ = !x.allFinite() ||
              (M_ * x - probe).norm() > 1e-6 * std::max(1.0, probe.norm());
}

Eigen::VectorXd KktFactorization::solve(const Eigen::VectorXd& rhs) const {
  if (singular_) throw SingularKKT("KKT matrix is singular");
  return lu_.solve(rhs);
}

Eigen::MatrixXd KktFactorization::solve(const Eigen::MatrixXd& rhs) const {
  if (singular_) throw SingularKKT("KKT matrix is singular");
  return lu_.solve(rhs);
}

double KktFactorization::residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& b) const {
  return (M_ * x - b).norm() / std::max(1.0, b.norm());
}

Inertia KktFactorization::inertia() const {
  if (!inertia_cached_) {
    inertia_ = matrix_inertia(M_);
    inertia_cached_ = true;
  }
  return inertia_;
}

Inertia matrix_inertia(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SingularKKT("eigendecomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double tol = 1e-11 * scale;
  Inertia in;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol)
      ++in.pos;
    else if (ev[i] < -tol)
      ++in.neg;
    else
      ++in.zero;
  }
  return in;
}

}  // namespace sensaug
