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

#ifndef SENSAUG_PENDULUM_HPP
#define SENSAUG_PENDULUM_HPP

#include <memory>

#include "sensaug/nlp.hpp"

namespace sensaug {

/// Pendulum with torque input u at the pivot:
///   m l^2 wdd = u - b wd - m grav l sin(w).
struct PendulumParams {
  double m = 1.0;      // kg
  double l = 1.0;      // m
  double b = 0.1;      // N m s / rad
  double grav = 9.81;  // m / s^2
  double u_max = 20.0; // N m
};

struct MpcSpec {
  int N = 40;
  double dt = 0.05;
  Eigen::Vector2d Q{10.0, 0.1};
  double R = 0.01;
  Eigen::Vector2d P_term{10.0, 0.1};
  Eigen::Vector2d x_ref{3.14, 0.0};
};

/// Multiple-shooting transcription of the swing-up NMPC with p = x0:
/// w = (x_1..x_N, u_0..u_{N-1}), RK4 shooting defects, torque bounds
/// |u_k| <= u_max, quadratic tracking cost. action_indices selects u_0.
std::unique_ptr<ParametricNLP> build_pendulum_nlp(const PendulumParams& params,
                                                  const MpcSpec& spec);

/// One RK4 step of the plant ODE.
Eigen::Vector2d plant_step(const PendulumParams& params, const Eigen::Vector2d& x, double u,
                           double dt);

double pendulum_energy(const PendulumParams& params, const Eigen::Vector2d& x);

}  // namespace sensaug

#endif  // SENSAUG_PENDULUM_HPP
