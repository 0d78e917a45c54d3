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

#ifndef SENSAUG_NLP_HPP
#define SENSAUG_NLP_HPP

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "sensaug/expr_graph.hpp"

namespace sensaug {

enum class PointKind { exact_anchor, augmented };

/// Primal-dual candidate s = [w, lambda, mu] at parameter p.
struct PrimalDualPoint {
  Eigen::VectorXd w;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
  Eigen::VectorXd p;
  std::vector<int> active_set;  // sorted indices into the inequality rows
  double stationarity_norm = std::numeric_limits<double>::quiet_NaN();
  PointKind kind = PointKind::augmented;
};

/// Parametric NLP
///   min_w J(w, p)  s.t.  c(w, p) = 0,  g(w, p) <= 0.
/// The three graphs share the same (w, p) input layout. Call finalize()
/// once after construction; it differentiates everything and builds the
/// evaluators. Immutable afterwards, safe for concurrent use.
class ParametricNLP {
 public:
  std::unique_ptr<ExprGraph> objective;     // 1 output
  std::unique_ptr<ExprGraph> equalities;    // n_c outputs
  std::unique_ptr<ExprGraph> inequalities;  // n_g outputs
  int n_w = 0, n_p = 0, n_c = 0, n_g = 0;
  std::vector<int> action_indices;  // slice of w holding the control action
  std::function<Eigen::VectorXd(const Eigen::VectorXd& p)> initial_guess;

  void finalize();

  double eval_objective(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;
  Eigen::VectorXd grad_objective(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;
  Eigen::VectorXd eval_c(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;
  Eigen::VectorXd eval_g(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;
  Eigen::MatrixXd jac_c_w(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;
  Eigen::MatrixXd jac_c_p(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;
  Eigen::MatrixXd jac_g_w(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;
  Eigen::MatrixXd jac_g_p(const Eigen::VectorXd& w, const Eigen::VectorXd& p) const;

  /// Hessian blocks of L = J + lambda' c + mu' g.
  Eigen::MatrixXd hess_lagrangian_ww(const Eigen::VectorXd& w, const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& lambda,
                                     const Eigen::VectorXd& mu) const;
  Eigen::MatrixXd hess_lagrangian_wp(const Eigen::VectorXd& w, const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& lambda,
                                     const Eigen::VectorXd& mu) const;

  Eigen::VectorXd grad_lagrangian_w(const PrimalDualPoint& s) const;
  Eigen::VectorXd action(const Eigen::VectorXd& w) const;

  bool finalized() const { return finalized_; }

 private:
  bool finalized_ = false;
  MatrixEvaluator obj_value_, obj_grad_w_;
  MatrixEvaluator eq_value_, eq_jac_w_, eq_jac_p_;
  MatrixEvaluator ineq_value_, ineq_jac_w_, ineq_jac_p_;
  WeightedHessianEvaluator obj_hess_ww_, obj_hess_wp_;
  WeightedHessianEvaluator eq_hess_ww_, eq_hess_wp_;
  WeightedHessianEvaluator ineq_hess_ww_, ineq_hess_wp_;
};

/// phi = [grad_w L; c; g_A] stacked with s.active_set. Records ||grad_w L||
/// into s.stationarity_norm.
Eigen::VectorXd kkt_residual(const ParametricNLP& nlp, PrimalDualPoint& s);

/// {j : g_j(w, p) >= -activity_tol}. Ignores multipliers.
std::vector<int> detect_active_set(const ParametricNLP& nlp, const PrimalDualPoint& s,
                                   double activity_tol);

struct RegularityReport {
  bool licq = false;
  bool strict_complementarity = false;
  bool sosc = false;
  bool sosc_indeterminate = false;  // factorization failed, SOSC unknown
  int constraint_rank = 0;
  double min_active_mu = 0.0;
  int inertia_pos = 0, inertia_neg = 0, inertia_zero = 0;
  bool pass() const { return licq && strict_complementarity && sosc; }
};

/// Verifies LICQ (rank of [grad c, grad g_A]), strict complementarity
/// (min_{j in A} mu_j >= comp_margin) and SOSC (KKT-matrix inertia equals
/// (n_w, n_c + |A|, 0)) at a candidate KKT point.
RegularityReport check_regularity(const ParametricNLP& nlp, const PrimalDualPoint& s,
                                  double comp_margin);

constexpr double kDefaultActivityTol = 1e-6;
constexpr double kDefaultCompMargin = 1e-8;

}  // namespace sensaug

#endif  // SENSAUG_NLP_HPP
