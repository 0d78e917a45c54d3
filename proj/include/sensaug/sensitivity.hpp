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

#ifndef SENSAUG_SENSITIVITY_HPP
#define SENSAUG_SENSITIVITY_HPP

#include <memory>

#include "sensaug/kkt.hpp"
#include "sensaug/nlp.hpp"

namespace sensaug {

struct RegularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// H = ds*/dp at an anchor, rows ordered [dw; dlambda; dmu_A]. Read-only
/// after construction; the factorization handle is shared with any number
/// of predictor/corrector workers.
struct SensitivityMatrix {
  Eigen::MatrixXd H;  // (n_w + n_c + |A|) x n_p
  PrimalDualPoint anchor;
  std::vector<int> active_set;
  std::shared_ptr<const KktFactorization> kkt_factorization;
};

/// Factorizes the KKT matrix at s (blocks frozen to s.active_set).
/// Throws SingularKKT when the matrix is numerically singular.
std::shared_ptr<const KktFactorization> assemble_kkt(const ParametricNLP& nlp,
                                                     const PrimalDualPoint& s);

/// Solves dphi/ds * H = -dphi/dp at the anchor. Refuses points that fail
/// check_regularity (RegularityError); one factorization serves every
/// subsequent predictor/corrector solve at this anchor.
SensitivityMatrix sensitivity_matrix(const ParametricNLP& nlp, const PrimalDualPoint& s,
                                     double comp_margin = kDefaultCompMargin);

/// Linear predictor s_hat(p + dp) = s* + H dp. Performs no graph
/// evaluations; mu stays zero off the frozen active set.
PrimalDualPoint predict(const PrimalDualPoint& anchor, const SensitivityMatrix& H,
                        const Eigen::VectorXd& dp);

struct CorrectorConfig {
  double eps_tol = 1e-6;
  int max_corrector_iters = 10;
  bool chord_mode = false;  // reuse the anchor factorization instead of refactorizing
  double activity_tol = kDefaultActivityTol;
};

enum class CorrectorStatus {
  converged,
  diverged,           // residual increased twice in a row
  max_iters,
  singular_kkt,
  active_set_changed,  // converged, but post-correction validity check failed
};

struct CorrectorResult {
  PrimalDualPoint point;
  CorrectorStatus status = CorrectorStatus::max_iters;
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  std::vector<double> residual_history;
};

/// Fixed-active-set SQP steps [w; lambda; mu_A] <- [w; 0; 0] - M^{-1} [grad J; c; g_A]
/// until max(||grad_w L||, ||c||_inf, ||g_A||_inf) <= eps_tol.
/// `anchor_factorization` is only consulted in chord mode.
CorrectorResult correct(const ParametricNLP& nlp, const PrimalDualPoint& s_hat,
                        const CorrectorConfig& cfg,
                        const KktFactorization* anchor_factorization = nullptr);

enum class ActiveSetValidity { valid, changed };

/// `changed` if any frozen-active mu_j < 0 or any frozen-inactive
/// g_j(w, p) > activity_tol.
ActiveSetValidity validate_active_set(const ParametricNLP& nlp, const PrimalDualPoint& s,
                                      double activity_tol);

}  // namespace sensaug

#endif  // SENSAUG_SENSITIVITY_HPP
