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

#ifndef SENSAUG_PROBLEMS_HPP
#define SENSAUG_PROBLEMS_HPP

#include <memory>

#include "sensaug/nlp.hpp"

namespace sensaug {

/// min 1/2 (w1^2 + w2^2)  s.t.  w1 + w2 = p.
/// Closed form: w = (p/2, p/2), lambda = -p/2 — affine in p, so the linear
/// predictor is exact.
std::unique_ptr<ParametricNLP> make_oracle_eqp();

/// min (w - p)^2  s.t.  w <= 1.
/// Closed form: w*(p) = min(p, 1), mu = 2 max(p - 1, 0) — one active-set
/// kink at p = 1.
std::unique_ptr<ParametricNLP> make_oracle_ineq();

/// min w^2  s.t.  w <= 0, -w <= 0 — duplicated constraint gradient at the
/// solution, so LICQ fails there.
std::unique_ptr<ParametricNLP> make_degenerate_bounds();

}  // namespace sensaug

#endif  // SENSAUG_PROBLEMS_HPP
