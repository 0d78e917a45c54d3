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

#ifndef SENSAUG_KKT_HPP
#define SENSAUG_KKT_HPP

#include <stdexcept>

#include <Eigen/Dense>

#include "sensaug/nlp.hpp"

namespace sensaug {

struct SingularKKT : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Inertia {
  int pos = 0, neg = 0, zero = 0;
  bool operator==(const Inertia&) const = default;
};

/// Symmetric KKT matrix
///   [ H       grad c   grad g_A ]
///   [ grad c'   0         0     ]
///   [ grad g_A' 0         0     ]
/// with H = hess_ww L, all blocks at (s.w, s.p, s.lambda, s.mu).
Eigen::MatrixXd kkt_matrix(const ParametricNLP& nlp, const PrimalDualPoint& s);

/// [hess_wp L; jac_p c; jac_p g_A] — the dphi/dp block.
Eigen::MatrixXd kkt_rhs_p(const ParametricNLP& nlp, const PrimalDualPoint& s);

/// LU factorization of a (symmetric, possibly indefinite) KKT matrix,
/// reusable for any number of right-hand sides.
class KktFactorization {
 public:
  explicit KktFactorization(Eigen::MatrixXd M);

  const Eigen::MatrixXd& matrix() const { return M_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  /// Relative residual ||M x - b|| / max(1, ||b||) of a candidate solution.
  double residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& b) const;
  bool singular() const { return singular_; }

  /// Signature of the eigenvalue spectrum (computed on demand, cached).
  Inertia inertia() const;

 private:
  Eigen::MatrixXd M_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool singular_ = false;
  mutable bool inertia_cached_ = false;
  mutable Inertia inertia_;
};

Inertia matrix_inertia(const Eigen::MatrixXd& M);

}  // namespace sensaug

#endif  // SENSAUG_KKT_HPP
