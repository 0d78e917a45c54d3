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

#ifndef SENSAUG_SQP_HPP
#define SENSAUG_SQP_HPP

#include <optional>

#include "sensaug/kkt.hpp"
#include "sensaug/nlp.hpp"

namespace sensaug {

struct SolverConfig {
  double kkt_tol = 1e-8;
  int max_iter = 100;
  double merit_penalty = 10.0;  // initial l1 penalty weight, adapted upwards
  double regularization_floor = 1e-8;
  double linesearch_backtrack = 0.5;
  double activity_tol = kDefaultActivityTol;
  double comp_margin = kDefaultCompMargin;
  // KKT error below which the exact Lagrangian Hessian replaces the
  // Gauss-Newton Hessian in the QP subproblems.
  double exact_hessian_switch = 1e-3;
};

enum class SolveStatus {
  converged,
  max_iterations,
  infeasible_subproblem,
  regularity_failure,  // converged, but LICQ/SOSC/strict complementarity failed
};

struct SolveResult {
  PrimalDualPoint point;
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double kkt_error = std::numeric_limits<double>::infinity();
  RegularityReport regularity;
  bool converged() const {
    return status == SolveStatus::converged || status == SolveStatus::regularity_failure;
  }
};

struct EqpResult {
  Eigen::VectorXd step;
  Eigen::VectorXd multipliers;
  double tau = 0.0;  // inertia-correction shift added to the (w,w) block
  int corrections = 0;
};

/// Saddle-point kernel shared by the SQP solver and the corrector:
/// solves [H + tau I, A'; A, 0] [d; y] = -[gradient; residuals], with tau
/// inflated from `regularization_floor` until H + tau I is positive
/// definite (which fixes the KKT inertia when A has full row rank).
EqpResult solve_eqp(const Eigen::MatrixXd& H, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& gradient, const Eigen::VectorXd& residuals,
                    double regularization_floor = 1e-8);

/// Line-search SQP with l1 merit function and a working-set loop for the
/// inequality QP subproblems.
SolveResult solve(const ParametricNLP& nlp, const Eigen::VectorXd& p,
                  const std::optional<PrimalDualPoint>& warm_start, const SolverConfig& cfg);

/// max of stationarity, primal feasibility and complementarity violations.
double kkt_error_inf(const ParametricNLP& nlp, const PrimalDualPoint& s);

}  // namespace sensaug

#endif  // SENSAUG_SQP_HPP
