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

#include "sensaug/pendulum.hpp"

#include <array>
#include <cmath>

namespace sensaug {

namespace {

// Angle is deliberately not wrapped: wrapping is nonsmooth and the
// parameter box already limits omega to one revolution.
std::array<Expr, 2> ode(const PendulumParams& prm, Expr omega, Expr omegadot, Expr u) {
  const double ml2 = prm.m * prm.l * prm.l;
  Expr omegadd = (u - prm.b * omegadot - prm.m * prm.grav * prm.l * sin(omega)) / ml2;
  return {omegadot, omegadd};
}

std::array<Expr, 2> rk4_step(const PendulumParams& prm, double dt, std::array<Expr, 2> x,
                             Expr u) {
  const auto k1 = ode(prm, x[0], x[1], u);
  const auto k2 = ode(prm, x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1], u);
  const auto k3 = ode(prm, x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1], u);
  const auto k4 = ode(prm, x[0] + dt * k3[0], x[1] + dt * k3[1], u);
  return {x[0] + (dt / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
          x[1] + (dt / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

}  // namespace

std::unique_ptr<ParametricNLP> build_pendulum_nlp(const PendulumParams& params,
                                                  const MpcSpec& spec) {
  const int N = spec.N;
  const int n_w = 3 * N;  // x_1..x_N then u_0..u_{N-1}
  const int n_p = 2;
  auto nlp = std::make_unique<ParametricNLP>();
  nlp->n_w = n_w;
  nlp->n_p = n_p;

  const auto x_index = [](int k, int i) { return 2 * (k - 1) + i; };  // k in 1..N
  const auto u_index = [N](int k) { return 2 * N + k; };              // k in 0..N-1

  const auto state = [&](ExprGraph& g, int k) -> std::array<Expr, 2> {
    if (k == 0)
      return {Expr{&g, g.var(VarBlock::p, 0)}, Expr{&g, g.var(VarBlock::p, 1)}};
    return {Expr{&g, g.var(VarBlock::w, x_index(k, 0))},
            Expr{&g, g.var(VarBlock::w, x_index(k, 1))}};
  };

  // Objective: quadratic tracking stage cost plus terminal cost.
  {
    auto g = std::make_unique<ExprGraph>(n_w, n_p);
    Expr cost{g.get(), g->constant(0.0)};
    for (int k = 0; k < N; ++k) {
      const auto x = state(*g, k);
      Expr u{g.get(), g->var(VarBlock::w, u_index(k))};
      cost = cost + spec.Q[0] * square(x[0] - spec.x_ref[0]) +
             spec.Q[1] * square(x[1] - spec.x_ref[1]) + spec.R * square(u);
    }
    const auto xN = state(*g, N);
    cost = cost + spec.P_term[0] * square(xN[0] - spec.x_ref[0]) +
           spec.P_term[1] * square(xN[1] - spec.x_ref[1]);
    g->set_outputs({cost.id});
    nlp->objective = std::move(g);
  }

  // Equalities: RK4 shooting defects x_{k+1} - F(x_k, u_k), x_0 := p.
  {
    auto g = std::make_unique<ExprGraph>(n_w, n_p);
    std::vector<int> roots;
    for (int k = 0; k < N; ++k) {
      const auto xk = state(*g, k);
      Expr u{g.get(), g->var(VarBlock::w, u_index(k))};
      const auto F = rk4_step(params, spec.dt, xk, u);
      const auto xn = state(*g, k + 1);
      roots.push_back((xn[0] - F[0]).id);
      roots.push_back((xn[1] - F[1]).id);
    }
    g->set_outputs(std::move(roots));
    nlp->equalities = std::move(g);
  }

  // Inequalities: torque bounds u_k - u_max <= 0 and -u_k - u_max <= 0.
  {
    auto g = std::make_unique<ExprGraph>(n_w, n_p);
    std::vector<int> roots;
    for (int k = 0; k < N; ++k) {
      Expr u{g.get(), g->var(VarBlock::w, u_index(k))};
      roots.push_back((u - params.u_max).id);
      roots.push_back((-u - params.u_max).id);
    }
    g->set_outputs(std::move(roots));
    nlp->inequalities = std::move(g);
  }

  nlp->action_indices = {u_index(0)};
  nlp->initial_guess = [params, spec, N](const Eigen::VectorXd& p) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(3 * N);
    Eigen::Vector2d x(p[0], p[1]);
    for (int k = 1; k <= N; ++k) {
      x = plant_step(params, x, 0.0, spec.dt);
      w[2 * (k - 1)] = x[0];
      w[2 * (k - 1) + 1] = x[1];
    }
    return w;
  };
  nlp->finalize();
  return nlp;
}

Eigen::Vector2d plant_step(const PendulumParams& prm, const Eigen::Vector2d& x, double u,
                           double dt) {
  const double ml2 = prm.m * prm.l * prm.l;
  const auto f = [&](const Eigen::Vector2d& s) -> Eigen::Vector2d {
    return {s[1], (u - prm.b * s[1] - prm.m * prm.grav * prm.l * std::sin(s[0])) / ml2};
  };
  const Eigen::Vector2d k1 = f(x);
  const Eigen::Vector2d k2 = f(x + 0.5 * dt * k1);
  const Eigen::Vector2d k3 = f(x + 0.5 * dt * k2);
  const Eigen::Vector2d k4 = f(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double pendulum_energy(const PendulumParams& prm, const Eigen::Vector2d& x) {
  // Zero reference at the hanging position.
  return 0.5 * prm.m * prm.l * prm.l * x[1] * x[1] +
         prm.m * prm.grav * prm.l * (1.0 - std::cos(x[0]));
}

}  // namespace sensaug
