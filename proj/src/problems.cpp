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

#include "sensaug/problems.hpp"

namespace sensaug {

std::unique_ptr<ParametricNLP> make_oracle_eqp() {
  auto nlp = std::make_unique<ParametricNLP>();
  nlp->n_w = 2;
  nlp->n_p = 1;
  {
    auto g = std::make_unique<ExprGraph>(2, 1);
    Expr w1{g.get(), g->var(VarBlock::w, 0)};
    Expr w2{g.get(), g->var(VarBlock::w, 1)};
    g->set_outputs({(0.5 * (square(w1) + square(w2))).id});
    nlp->objective = std::move(g);
  }
  {
    auto g = std::make_unique<ExprGraph>(2, 1);
    Expr w1{g.get(), g->var(VarBlock::w, 0)};
    Expr w2{g.get(), g->var(VarBlock::w, 1)};
    Expr p{g.get(), g->var(VarBlock::p, 0)};
    g->set_outputs({(w1 + w2 - p).id});
    nlp->equalities = std::move(g);
  }
  {
    auto g = std::make_unique<ExprGraph>(2, 1);
    g->set_outputs({});
    nlp->inequalities = std::move(g);
  }
  nlp->action_indices = {0, 1};
  nlp->finalize();
  return nlp;
}

std::unique_ptr<ParametricNLP> make_oracle_ineq() {
  auto nlp = std::make_unique<ParametricNLP>();
  nlp->n_w = 1;
  nlp->n_p = 1;
  {
    auto g = std::make_unique<ExprGraph>(1, 1);
    Expr w{g.get(), g->var(VarBlock::w, 0)};
    Expr p{g.get(), g->var(VarBlock::p, 0)};
    g->set_outputs({square(w - p).id});
    nlp->objective = std::move(g);
  }
  {
    auto g = std::make_unique<ExprGraph>(1, 1);
    g->set_outputs({});
    nlp->equalities = std::move(g);
  }
  {
    auto g = std::make_unique<ExprGraph>(1, 1);
    Expr w{g.get(), g->var(VarBlock::w, 0)};
    g->set_outputs({(w - 1.0).id});
    nlp->inequalities = std::move(g);
  }
  nlp->action_indices = {0};
  nlp->finalize();
  return nlp;
}

std::unique_ptr<ParametricNLP> make_degenerate_bounds() {
  auto nlp = std::make_unique<ParametricNLP>();
  nlp->n_w = 1;
  nlp->n_p = 1;
  {
    auto g = std::make_unique<ExprGraph>(1, 1);
    Expr w{g.get(), g->var(VarBlock::w, 0)};
    g->set_outputs({square(w).id});
    nlp->objective = std::move(g);
  }
  {
    auto g = std::make_unique<ExprGraph>(1, 1);
    g->set_outputs({});
    nlp->equalities = std::move(g);
  }
  {
    auto g = std::make_unique<ExprGraph>(1, 1);
    Expr w{g.get(), g->var(VarBlock::w, 0)};
    g->set_outputs({w.id, (-w).id});
    nlp->inequalities = std::move(g);
  }
  nlp->action_indices = {0};
  nlp->finalize();
  return nlp;
}

}  // namespace sensaug
