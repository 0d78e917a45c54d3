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

#include "sensaug/nlp.hpp"

#include <algorithm>

#include <Eigen/Dense>

#include "sensaug/kkt.hpp"

namespace sensaug {

void ParametricNLP::finalize() {
  if (finalized_) return;
  if (!objective || !equalities || !inequalities)
    throw std::invalid_argument("ParametricNLP: missing graphs");
  if (objective->num_outputs() != 1)
    throw std::invalid_argument("ParametricNLP: objective must be scalar");
  n_c = equalities->num_outputs();
  n_g = inequalities->num_outputs();
  for (int idx : action_indices)
    if (idx < 0 || idx >= n_w) throw std::invalid_argument("action index out of range");

  obj_grad_w_ = make_jacobian(*objective, VarBlock::w);
  obj_hess_ww_ = WeightedHessianEvaluator(*objective, VarBlock::w, VarBlock::w);
  obj_hess_wp_ = WeightedHessianEvaluator(*objective, VarBlock::w, VarBlock::p);
  obj_value_ = make_value_evaluator(*objective);

  eq_jac_w_ = make_jacobian(*equalities, VarBlock::w);
  eq_jac_p_ = make_jacobian(*equalities, VarBlock::p);
  eq_hess_ww_ = WeightedHessianEvaluator(*equalities, VarBlock::w, VarBlock::w);
  eq_hess_wp_ = WeightedHessianEvaluator(*equalities, VarBlock::w, VarBlock::p);
  eq_value_ = make_value_evaluator(*equalities);

  ineq_jac_w_ = make_jacobian(*inequalities, VarBlock::w);
  ineq_jac_p_ = make_jacobian(*inequalities, VarBlock::p);
  ineq_hess_ww_ = WeightedHessianEvaluator(*inequalities, VarBlock::w, VarBlock::w);
  ineq_hess_wp_ = WeightedHessianEvaluator(*inequalities, VarBlock::w, VarBlock::p);
  ineq_value_ = make_value_evaluator(*inequalities);

  if (!initial_guess)
    initial_guess = [n = n_w](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n); };
  finalized_ = true;
}

double ParametricNLP::eval_objective(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  return obj_value_.eval(w, p)(0, 0);
}

Eigen::VectorXd ParametricNLP::grad_objective(const Eigen::VectorXd& w,
                                              const Eigen::VectorXd& p) const {
  return obj_grad_w_.eval(w, p).row(0).transpose();
}

Eigen::VectorXd ParametricNLP::eval_c(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  return eq_value_.eval(w, p).col(0);
}

Eigen::VectorXd ParametricNLP::eval_g(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  return ineq_value_.eval(w, p).col(0);
}

Eigen::MatrixXd ParametricNLP::jac_c_w(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  return eq_jac_w_.eval(w, p);
}

Eigen::MatrixXd ParametricNLP::jac_c_p(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  return eq_jac_p_.eval(w, p);
}

Eigen::MatrixXd ParametricNLP::jac_g_w(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  return ineq_jac_w_.eval(w, p);
}

Eigen::MatrixXd ParametricNLP::jac_g_p(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const {
  return ineq_jac_p_.eval(w, p);
}

Eigen::MatrixXd ParametricNLP::hess_lagrangian_ww(const Eigen::VectorXd& w,
                                                  const Eigen::VectorXd& p,
                                                  const Eigen::VectorXd& lambda,
                                                  const Eigen::VectorXd& mu) const {
  Eigen::MatrixXd H = obj_hess_ww_.eval(w, p, Eigen::VectorXd::Ones(1));
  if (n_c > 0) H += eq_hess_ww_.eval(w, p, lambda);
  if (n_g > 0) H += ineq_hess_ww_.eval(w, p, mu);
  return H;
}

Eigen::MatrixXd ParametricNLP::hess_lagrangian_wp(const Eigen::VectorXd& w,
                                                  const Eigen::VectorXd& p,
                                                  const Eigen::VectorXd& lambda,
                                                  const Eigen::VectorXd& mu) const {
  Eigen::MatrixXd H = obj_hess_wp_.eval(w, p, Eigen::VectorXd::Ones(1));
  if (n_c > 0) H += eq_hess_wp_.eval(w, p, lambda);
  if (n_g > 0) H += ineq_hess_wp_.eval(w, p, mu);
  return H;
}

Eigen::VectorXd ParametricNLP::grad_lagrangian_w(const PrimalDualPoint& s) const {
  Eigen::VectorXd gL = grad_objective(s.w, s.p);
  if (n_c > 0) gL += jac_c_w(s.w, s.p).transpose() * s.lambda;
  if (n_g > 0) gL += jac_g_w(s.w, s.p).transpose() * s.mu;
  return gL;
}

Eigen::VectorXd ParametricNLP::action(const Eigen::VectorXd& w) const {
  Eigen::VectorXd u(action_indices.size());
  for (std::size_t i = 0; i < action_indices.size(); ++i)
    u[static_cast<Eigen::Index>(i)] = w[action_indices[i]];
  return u;
}

Eigen::VectorXd kkt_residual(const ParametricNLP& nlp, PrimalDualPoint& s) {
  if (s.w.size() != nlp.n_w || s.lambda.size() != nlp.n_c || s.mu.size() != nlp.n_g ||
      s.p.size() != nlp.n_p)
    throw std::invalid_argument("kkt_residual: dimension mismatch");
  const Eigen::VectorXd gL = nlp.grad_lagrangian_w(s);
  s.stationarity_norm = gL.norm();
  const int n_a = static_cast<int>(s.active_set.size());
  Eigen::VectorXd phi(nlp.n_w + nlp.n_c + n_a);
  phi.head(nlp.n_w) = gL;
  if (nlp.n_c > 0) phi.segment(nlp.n_w, nlp.n_c) = nlp.eval_c(s.w, s.p);
  if (n_a > 0) {
    const Eigen::VectorXd g = nlp.eval_g(s.w, s.p);
    for (int k = 0; k < n_a; ++k) phi[nlp.n_w + nlp.n_c + k] = g[s.active_set[static_cast<std::size_t>(k)]];
  }
  return phi;
}

std::vector<int> detect_active_set(const ParametricNLP& nlp, const PrimalDualPoint& s,
                                   double activity_tol) {
  std::vector<int> active;
  if (nlp.n_g == 0) return active;
  const Eigen::VectorXd g = nlp.eval_g(s.w, s.p);
  for (int j = 0; j < nlp.n_g; ++j)
    if (g[j] >= -activity_tol) active.push_back(j);
  return active;
}

RegularityReport check_regularity(const ParametricNLP& nlp, const PrimalDualPoint& s,
                                  double comp_margin) {
  RegularityReport rep;
  const int n_a = static_cast<int>(s.active_set.size());
  const int m = nlp.n_c + n_a;

  // LICQ: [grad c, grad g_A] has full column rank m.
  if (m == 0) {
    rep.licq = true;
  } else {
    Eigen::MatrixXd A(nlp.n_w, m);
    if (nlp.n_c > 0) A.leftCols(nlp.n_c) = nlp.jac_c_w(s.w, s.p).transpose();
    if (n_a > 0) {
      const Eigen::MatrixXd Jg = nlp.jac_g_w(s.w, s.p);
      for (int k = 0; k < n_a; ++k)
        A.col(nlp.n_c + k) = Jg.row(s.active_set[static_cast<std::size_t>(k)]).transpose();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    rep.constraint_rank = static_cast<int>(qr.rank());
    rep.licq = rep.constraint_rank == m && m <= nlp.n_w;
  }

  // Strict complementarity on the active set.
  rep.min_active_mu = std::numeric_limits<double>::infinity();
  for (int j : s.active_set) rep.min_active_mu = std::min(rep.min_active_mu, s.mu[j]);
  rep.strict_complementarity = n_a == 0 || rep.min_active_mu >= comp_margin;

  // SOSC via KKT-matrix inertia.
  try {
    const Inertia in = matrix_inertia(kkt_matrix(nlp, s));
    rep.inertia_pos = in.pos;
    rep.inertia_neg = in.neg;
    rep.inertia_zero = in.zero;
    rep.sosc = in.pos == nlp.n_w && in.neg == m && in.zero == 0;
  } catch (const std::exception&) {
    rep.sosc = false;
    rep.sosc_indeterminate = true;
  }
  return rep;
}

}  // namespace sensaug
