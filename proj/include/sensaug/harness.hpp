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

#ifndef SENSAUG_HARNESS_HPP
#define SENSAUG_HARNESS_HPP

#include <functional>
#include <string>

#include "sensaug/augmentor.hpp"
#include "sensaug/pendulum.hpp"
#include "sensaug/policy.hpp"

namespace sensaug {

struct CaseReport {
  int case_id = 0;
  int n_exact = 0;
  int n_augmented_predictor_only = 0;
  int n_augmented_predictor_corrector = 0;
  int n_discarded_predictor_only = 0;
  int n_discarded_predictor_corrector = 0;
  double t_exact_s = 0.0;
  double t_augment_predictor_only_s = 0.0;
  double t_augment_predictor_corrector_s = 0.0;
  double max_error_predictor_only = 0.0;
  double max_error_predictor_corrector = 0.0;
  double error_ratio = 0.0;
  int probe_count = 0;
  std::uint64_t seed = 0;
  std::string to_json() const;
};

struct CaseOptions {
  PendulumParams params;
  MpcSpec mpc;
  ParameterBox pbox;  // defaults to [0, 2pi] x [-5, 5]
  SolverConfig solver;
  double eps_tol = 1e-6;
  int probe_count = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  bool full_scale = false;  // paper-sized grids instead of desk-scale
  std::string output_dir;   // empty: nothing written
  CaseOptions();
};

/// Case 1: 10x10 anchors, small per-anchor grids. Case 2: 3x3 anchors,
/// dense per-anchor grids tiling the box. Case 3: a single anchor at the
/// box center, grid over the whole box. Each case runs in both modes and
/// probes the max policy error by exact re-solves.
CaseReport run_case(int case_id, const CaseOptions& opt);

/// Dataset of the corrector run of a case (for policy fitting).
GenerateResult run_case_generate(int case_id, const CaseOptions& opt, AugmentMode mode);

struct RolloutStep {
  double t;
  Eigen::Vector2d x;
  double u;
};

struct RolloutTrace {
  std::vector<RolloutStep> steps;
  bool target_reached = false;
  double time_reached = std::numeric_limits<double>::quiet_NaN();
  bool aborted = false;
};

using Controller = std::function<double(const Eigen::Vector2d&)>;

/// Stateful exact-MPC expert; warm-starts each solve from the previous one.
class ExpertMpc {
 public:
  ExpertMpc(const ParametricNLP* nlp, SolverConfig cfg) : nlp_(nlp), cfg_(cfg) {}
  double operator()(const Eigen::Vector2d& x);
  /// Full primal-dual solution of the last query.
  const SolveResult& last() const { return last_; }
  void reset() { warm_.reset(); }

 private:
  const ParametricNLP* nlp_;
  SolverConfig cfg_;
  std::optional<PrimalDualPoint> warm_;
  SolveResult last_;
};

Controller policy_controller(const PolicyModel& model);
Controller linear_controller(double k_omega, double k_omegadot, double k_const);

/// Alternates controller evaluation with plant steps. Target reached when
/// |omega - 3.14| <= 0.15 and |omegadot| <= 0.2 hold for one full second.
RolloutTrace closed_loop(const Controller& controller, const PendulumParams& params,
                         const Eigen::Vector2d& x0, double T, double dt);

void write_trace_csv(const RolloutTrace& trace, const std::string& path);
void write_trace_gnuplot(const std::string& csv_path, const std::string& gp_path);

struct ImitationConfig {
  int rollouts = 25;
  int feedback_augment = 25;
  // Expert queried every feedback_stride-th visited state: the expert is
  // the expensive resource the augmentation multiplies.
  int feedback_stride = 5;
  double T = 5.0;
  double dt = 0.05;
  Eigen::Vector2d feedback_half_widths{0.1, 0.25};
  double eps_tol = 1e-6;
  std::uint64_t seed = 7;
  bool stop_on_success = true;
  SolverConfig solver;
  PendulumParams params;
  MpcSpec mpc;
  ImitationConfig();
};

struct ImitationResult {
  PolicyModel policy;
  std::vector<bool> rollout_success;
  std::vector<int> dataset_size_after_rollout;
  int expert_failures = 0;
  bool task_achieved() const;
  int first_success_rollout() const;  // 1-based, -1 when never
};

/// Interactive-expert imitation loop: roll out the current policy, query
/// the exact MPC expert every feedback_stride-th visited state, optionally
/// augment samples around each feedback state, aggregate, refit after each
/// rollout.
ImitationResult imitation_loop(const Eigen::Vector3d& initial_policy, const ImitationConfig& cfg);

}  // namespace sensaug

#endif  // SENSAUG_HARNESS_HPP
