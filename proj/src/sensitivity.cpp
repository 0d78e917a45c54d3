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

#include "sensaug/sensitivity.hpp"

#include <algorithm>
#include <cmath>

namespace sensaug {

namespace {

// Stopping measure: Euclidean stationarity plus sup-norm feasibility of the
// frozen rows. Dominates ||phi||_inf, so corrected samples satisfy both the
// stationarity test and the full-residual acceptance check.
double corrector_residual(const ParametricNLP& nlp, PrimalDualPoint& s) {
  const Eigen::VectorXd phi = kkt_residual(nlp, s);
  double r = s.stationarity_norm;
  if (phi.size() > nlp.n_w)
    r = std::max(r, phi.tail(phi.size() - nlp.n_w).lpNorm<Eigen::Infinity>());
  return r;
}

}  // namespace

std::shared_ptr<const KktFactorization> assemble_kkt(const ParametricNLP& nlp,
                                                     const PrimalDualPoint& s) {
  auto fac = std::make_shared<KktFactorization>(kkt_matrix(nlp, s));
  if (fac->singular()) throw SingularKKT("assemble_kkt: singular KKT matrix");
  return fac;
}

SensitivityMatrix sensitivity_matrix(const ParametricNLP& nlp, const PrimalDualPoint& s,
                                     double comp_margin) {
  const RegularityReport rep = check_regularity(nlp, s, comp_margin);
  if (!rep.pass())
    throw RegularityError("sensitivity_matrix: point fails LICQ/SOSC/strict complementarity");
  SensitivityMatrix out;
  out.kkt_factorization = assemble_kkt(nlp, s);
  out.H = out.kkt_factorization->solve(Eigen::MatrixXd(-kkt_rhs_p(nlp, s)));
  out.anchor = s;
  out.active_set = s.active_set;
  return out;
}

PrimalDualPoint predict(const PrimalDualPoint& anchor, const SensitivityMatrix& H,
                        const Eigen::VectorXd& dp) {
  const int n_w = static_cast<int>(anchor.w.size());
  const int n_c = static_cast<int>(anchor.lambda.size());
  const int n_a = static_cast<int>(H.active_set.size());
  const Eigen::VectorXd ds = H.H * dp;
  PrimalDualPoint out = anchor;
  out.p = anchor.p + dp;
  out.w += ds.head(n_w);
  if (n_c > 0) out.lambda += ds.segment(n_w, n_c);
  out.mu.setZero();
  for (int k = 0; k < n_a; ++k) {
    const int j = H.active_set[static_cast<std::size_t>(k)];
    out.mu[j] = anchor.mu[j] + ds[n_w + n_c + k];
  }
  out.active_set = H.active_set;
  out.kind = PointKind::augmented;
  out.stationarity_norm = std::numeric_limits<double>::quiet_NaN();
  return out;
}

CorrectorResult correct(const ParametricNLP& nlp, const PrimalDualPoint& s_hat,
                        const CorrectorConfig& cfg,
                        const KktFactorization* anchor_factorization) {
  CorrectorResult res;
  res.point = s_hat;
  res.point.kind = PointKind::augmented;
  const int n_w = nlp.n_w;
  const int n_c = nlp.n_c;
  const int n_a = static_cast<int>(s_hat.active_set.size());

  double prev = std::numeric_limits<double>::infinity();
  int increases = 0;
  try {
    res.final_residual = corrector_residual(nlp, res.point);
    res.residual_history.push_back(res.final_residual);
    while (res.final_residual > cfg.eps_tol) {
      if (res.iterations >= cfg.max_corrector_iters) {
        res.status = CorrectorStatus::max_iters;
        return res;
      }
      Eigen::VectorXd rhs(n_w + n_c + n_a);
      rhs.head(n_w) = nlp.grad_objective(res.point.w, res.point.p);
      if (n_c > 0) rhs.segment(n_w, n_c) = nlp.eval_c(res.point.w, res.point.p);
      if (n_a > 0) {
        const Eigen::VectorXd g = nlp.eval_g(res.point.w, res.point.p);
        for (int k = 0; k < n_a; ++k)
          rhs[n_w + n_c + k] = g[res.point.active_set[static_cast<std::size_t>(k)]];
      }

      Eigen::VectorXd step;
      if (cfg.chord_mode && anchor_factorization != nullptr) {
        step = anchor_factorization->solve(rhs);
      } else {
        const KktFactorization fac(kkt_matrix(nlp, res.point));
        if (fac.singular()) {
          res.status = CorrectorStatus::singular_kkt;
          return res;
        }
        step = fac.solve(rhs);
      }

      res.point.w -= step.head(n_w);
      if (n_c > 0) res.point.lambda = -step.segment(n_w, n_c);
      res.point.mu.setZero();
      for (int k = 0; k < n_a; ++k)
        res.point.mu[res.point.active_set[static_cast<std::size_t>(k)]] = -step[n_w + n_c + k];
      ++res.iterations;

      prev = res.final_residual;
      res.final_residual = corrector_residual(nlp, res.point);
      res.residual_history.push_back(res.final_residual);
      if (res.final_residual > prev) {
        if (++increases >= 2) {
          res.status = CorrectorStatus::diverged;
          return res;
        }
      } else {
        increases = 0;
      }
    }
  } catch (const EvalDomainError&) {
    res.status = CorrectorStatus::diverged;
    return res;
  } catch (const SingularKKT&) {
    res.status = CorrectorStatus::singular_kkt;
    return res;
  }

  res.status = validate_active_set(nlp, res.point, cfg.activity_tol) == ActiveSetValidity::valid
                   ? CorrectorStatus::converged
                   : CorrectorStatus::active_set_changed;
  return res;
}

ActiveSetValidity validate_active_set(const ParametricNLP& nlp, const PrimalDualPoint& s,
                                      double activity_tol) {
  for (int j : s.active_set)
    if (s.mu[j] < 0.0) return ActiveSetValidity::changed;
  if (nlp.n_g > 0) {
    const Eigen::VectorXd g = nlp.eval_g(s.w, s.p);
    for (int j = 0; j < nlp.n_g; ++j) {
      if (std::find(s.active_set.begin(), s.active_set.end(), j) != s.active_set.end()) continue;
      if (g[j] > activity_tol) return ActiveSetValidity::changed;
    }
  }
  return ActiveSetValidity::valid;
}

}  // namespace sensaug
