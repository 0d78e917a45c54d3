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

#include "sensaug/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace sensaug {

namespace {

double l1_infeasibility(const Eigen::VectorXd& c, const Eigen::VectorXd& g) {
  double v = c.cwiseAbs().sum();
  for (Eigen::Index j = 0; j < g.size(); ++j) v += std::max(g[j], 0.0);
  return v;
}

struct QpSolution {
  Eigen::VectorXd d;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;  // full length n_g, zero off the working set
};

// Working-set method for
//   min 0.5 d'Hd + grad'd  s.t.  Jc d + c = 0,  Jg d + g <= 0.
// Starts from the currently (nearly) active rows, drops rows with negative
// multipliers and adds the most violated row until consistent.
QpSolution solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& grad,
                    const Eigen::MatrixXd& Jc, const Eigen::VectorXd& c,
                    const Eigen::MatrixXd& Jg, const Eigen::VectorXd& g,
                    std::vector<int> working, double reg_floor) {
  const int n_c = static_cast<int>(c.size());
  const int n_g = static_cast<int>(g.size());
  std::set<std::vector<int>> seen;
  QpSolution sol;
  const int max_pivots = 3 * n_g + 10;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    const int n_a = static_cast<int>(working.size());
    Eigen::MatrixXd A(n_c + n_a, H.rows());
    Eigen::VectorXd r(n_c + n_a);
    A.topRows(n_c) = Jc;
    r.head(n_c) = c;
    for (int k = 0; k < n_a; ++k) {
      A.row(n_c + k) = Jg.row(working[static_cast<std::size_t>(k)]);
      r[n_c + k] = g[working[static_cast<std::size_t>(k)]];
    }
    const EqpResult eqp = solve_eqp(H, A, grad, r, reg_floor);
    sol.d = eqp.step;
    sol.lambda = eqp.multipliers.head(n_c);
    sol.mu = Eigen::VectorXd::Zero(n_g);
    for (int k = 0; k < n_a; ++k)
      sol.mu[working[static_cast<std::size_t>(k)]] = eqp.multipliers[n_c + k];

    // Drop the most negative working multiplier.
    int drop = -1;
    double most_negative = -1e-10;
    for (int k = 0; k < n_a; ++k) {
      const double m = eqp.multipliers[n_c + k];
      if (m < most_negative) {
        most_negative = m;
        drop = k;
      }
    }
    if (drop >= 0) {
      working.erase(working.begin() + drop);
      if (!seen.insert(working).second) return sol;  // cycle guard
      continue;
    }

    // Add the most violated inactive row.
    int add = -1;
    double worst = 1e-9;
    for (int j = 0; j < n_g; ++j) {
      if (std::find(working.begin(), working.end(), j) != working.end()) continue;
      const double v = Jg.row(j).dot(sol.d) + g[j];
      if (v > worst) {
        worst = v;
        add = j;
      }
    }
    if (add >= 0) {
      working.insert(std::lower_bound(working.begin(), working.end(), add), add);
      if (!seen.insert(working).second) return sol;
      continue;
    }
    return sol;
  }
  return sol;
}

}  // namespace

EqpResult solve_eqp(const Eigen::MatrixXd& H, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& gradient, const Eigen::VectorXd& residuals,
                    double regularization_floor) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(A.rows());
  EqpResult out;

  // Orthonormal basis of the null space of A: the correct inertia
  // condition only needs H + tau I positive definite on this subspace,
  // which keeps tau = 0 (a pure Newton step) whenever second-order
  // sufficiency holds, even though H itself is indefinite.
  Eigen::MatrixXd Z;
  if (m == 0) {
    Z = Eigen::MatrixXd::Identity(n, n);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
    const int rank = static_cast<int>(qr.rank());
    Z = Eigen::MatrixXd(qr.householderQ()).rightCols(n - rank);
  }
  const Eigen::MatrixXd Hz = Z.transpose() * H * Z;

  double tau = 0.0;
  for (;;) {
    bool pd = true;
    if (Z.cols() > 0) {
      Eigen::MatrixXd Hzr = Hz;
      if (tau > 0.0) Hzr.diagonal().array() += tau;
      pd = Eigen::LLT<Eigen::MatrixXd>(Hzr).info() == Eigen::Success;
    }
    if (pd) {
      Eigen::MatrixXd Hr = H;
      if (tau > 0.0) Hr.diagonal().array() += tau;
      if (m == 0) {
        out.step = Eigen::LLT<Eigen::MatrixXd>(Hr).solve(-gradient);
        out.multipliers = Eigen::VectorXd();
        out.tau = tau;
        return out;
      }
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
      M.topLeftCorner(n, n) = Hr;
      M.topRightCorner(n, m) = A.transpose();
      M.bottomLeftCorner(m, n) = A;
      Eigen::VectorXd rhs(n + m);
      rhs.head(n) = -gradient;
      rhs.tail(m) = -residuals;
      KktFactorization fac(M);
      if (!fac.singular()) {
        const Eigen::VectorXd x = fac.solve(rhs);
        if (fac.residual(x, rhs) <= 1e-10) {
          out.step = x.head(n);
          out.multipliers = x.tail(m);
          out.tau = tau;
          return out;
        }
      }
    }
    ++out.corrections;
    tau = tau == 0.0 ? regularization_floor : tau * 10.0;
    if (tau > 1e12) throw SingularKKT("solve_eqp: regularization exhausted");
  }
}

double kkt_error_inf(const ParametricNLP& nlp, const PrimalDualPoint& s) {
  double err = nlp.grad_lagrangian_w(s).lpNorm<Eigen::Infinity>();
  if (nlp.n_c > 0) err = std::max(err, nlp.eval_c(s.w, s.p).lpNorm<Eigen::Infinity>());
  if (nlp.n_g > 0) {
    const Eigen::VectorXd g = nlp.eval_g(s.w, s.p);
    for (int j = 0; j < nlp.n_g; ++j) {
      err = std::max(err, g[j]);                  // primal feasibility
      err = std::max(err, -s.mu[j]);              // dual feasibility
      err = std::max(err, std::abs(s.mu[j] * g[j]));  // complementarity
    }
  }
  return err;
}

SolveResult solve(const ParametricNLP& nlp, const Eigen::VectorXd& p,
                  const std::optional<PrimalDualPoint>& warm_start, const SolverConfig& cfg) {
  if (p.size() != nlp.n_p) throw std::invalid_argument("solve: parameter dimension mismatch");
  SolveResult res;
  PrimalDualPoint s;
  s.p = p;
  if (warm_start) {
    if (warm_start->w.size() != nlp.n_w || warm_start->lambda.size() != nlp.n_c ||
        warm_start->mu.size() != nlp.n_g)
      throw std::invalid_argument("solve: warm start dimension mismatch");
    s.w = warm_start->w;
    s.lambda = warm_start->lambda;
    s.mu = warm_start->mu.cwiseMax(0.0);
  } else {
    s.w = nlp.initial_guess(p);
    s.lambda = Eigen::VectorXd::Zero(nlp.n_c);
    s.mu = Eigen::VectorXd::Zero(nlp.n_g);
  }

  double nu = cfg.merit_penalty;
  res.kkt_error = kkt_error_inf(nlp, s);

  for (int it = 0; it < cfg.max_iter && res.kkt_error > cfg.kkt_tol; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd gradJ = nlp.grad_objective(s.w, s.p);
    const Eigen::VectorXd c = nlp.eval_c(s.w, s.p);
    const Eigen::VectorXd g = nlp.eval_g(s.w, s.p);
    const Eigen::MatrixXd Jc = nlp.jac_c_w(s.w, s.p);
    const Eigen::MatrixXd Jg = nlp.jac_g_w(s.w, s.p);
    // Far from the solution the exact Lagrangian Hessian can be strongly
    // indefinite (large multipliers on nonconvex constraints), which turns
    // the regularized QP steps into tiny creeping moves. Use the
    // Gauss-Newton Hessian (constraint curvature dropped) there and switch
    // to the exact Hessian for the quadratic local tail.
    const bool exact_hessian = res.kkt_error <= cfg.exact_hessian_switch;
    const Eigen::MatrixXd H =
        exact_hessian ? nlp.hess_lagrangian_ww(s.w, s.p, s.lambda, s.mu)
                      : nlp.hess_lagrangian_ww(s.w, s.p, Eigen::VectorXd::Zero(nlp.n_c),
                                               Eigen::VectorXd::Zero(nlp.n_g));

    std::vector<int> working;
    for (int j = 0; j < nlp.n_g; ++j)
      if (g[j] >= -cfg.activity_tol) working.push_back(j);

    QpSolution qp;
    try {
      qp = solve_qp(H, gradJ, Jc, c, Jg, g, std::move(working), cfg.regularization_floor);
    } catch (const SingularKKT&) {
      res.status = SolveStatus::infeasible_subproblem;
      break;
    }

    // Penalty update: keep nu above the multiplier scale.
    double mult_inf = 0.0;
    if (qp.lambda.size() > 0) mult_inf = qp.lambda.lpNorm<Eigen::Infinity>();
    if (qp.mu.size() > 0) mult_inf = std::max(mult_inf, qp.mu.lpNorm<Eigen::Infinity>());
    nu = std::max(nu, 1.5 * mult_inf + 1.0);

    const double infeas0 = l1_infeasibility(c, g);
    const double merit0 = nlp.eval_objective(s.w, s.p) + nu * infeas0;
    const double descent = gradJ.dot(qp.d) - nu * infeas0;

    // Local Newton acceptance: take the full step whenever it already
    // reduces the KKT error, which sidesteps the Maratos effect near the
    // solution; otherwise backtrack on the l1 merit.
    PrimalDualPoint trial = s;
    trial.w = s.w + qp.d;
    trial.lambda = qp.lambda;
    trial.mu = qp.mu.cwiseMax(0.0);
    bool accepted = false;
    try {
      const double trial_err = kkt_error_inf(nlp, trial);
      if (trial_err < res.kkt_error) {
        s = trial;
        res.kkt_error = trial_err;
        accepted = true;
      }
    } catch (const EvalDomainError&) {
    }

    if (!accepted) {
      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        PrimalDualPoint cand = s;
        cand.w = s.w + alpha * qp.d;
        cand.lambda = s.lambda + alpha * (qp.lambda - s.lambda);
        cand.mu = (s.mu + alpha * (qp.mu - s.mu)).cwiseMax(0.0);
        double merit;
        try {
          merit = nlp.eval_objective(cand.w, cand.p) +
                  nu * l1_infeasibility(nlp.eval_c(cand.w, cand.p), nlp.eval_g(cand.w, cand.p));
        } catch (const EvalDomainError&) {
          alpha *= cfg.linesearch_backtrack;
          continue;
        }
        if (merit <= merit0 + 1e-4 * alpha * descent || alpha < 1e-12) {
          s = cand;
          res.kkt_error = kkt_error_inf(nlp, s);
          accepted = true;
          break;
        }
        alpha *= cfg.linesearch_backtrack;
      }
      if (!accepted) break;  // line search failed outright
    }
  }

  s.active_set = detect_active_set(nlp, s, cfg.activity_tol);
  for (int j = 0; j < nlp.n_g; ++j)
    if (std::find(s.active_set.begin(), s.active_set.end(), j) == s.active_set.end())
      s.mu[j] = 0.0;
  res.kkt_error = kkt_error_inf(nlp, s);
  kkt_residual(nlp, s);  // records stationarity_norm

  if (res.kkt_error <= cfg.kkt_tol) {
    s.kind = PointKind::exact_anchor;
    res.regularity = check_regularity(nlp, s, cfg.comp_margin);
    res.status = res.regularity.pass() ? SolveStatus::converged : SolveStatus::regularity_failure;
  } else if (res.status != SolveStatus::infeasible_subproblem) {
    res.status = SolveStatus::max_iterations;
  }
  res.point = std::move(s);
  return res;
}

}  // namespace sensaug
