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

#include "sensaug/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sensaug {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string mode_name(AugmentMode mode) {
  return mode == AugmentMode::predictor_only ? "predictor_only" : "predictor_corrector";
}

AugmentConfig case_config(int case_id, const CaseOptions& opt, AugmentMode mode) {
  AugmentConfig cfg;
  cfg.mode = mode;
  cfg.eps_tol = opt.eps_tol;
  cfg.threads = opt.threads;
  cfg.anchor_sampler.kind = SamplerSpec::Kind::grid;
  cfg.neighborhood_sampler.kind = SamplerSpec::Kind::grid;
  switch (case_id) {
    case 1:
      // Many anchors, small per-anchor grids: errors stay small even
      // without correction.
      cfg.anchor_sampler.dims = {10, 10};
      cfg.neighborhood_sampler.dims = opt.full_scale ? std::vector<int>{10, 10}
                                                     : std::vector<int>{5, 5};
      break;
    case 2:
      // Few anchors, wide per-anchor grids tiling the box.
      cfg.anchor_sampler.dims = {3, 3};
      cfg.neighborhood_sampler.dims = opt.full_scale ? std::vector<int>{33, 33}
                                                     : std::vector<int>{11, 11};
      break;
    case 3:
      // A single anchor at the center of the box, grid over all of it.
      cfg.anchor_sampler.dims = {1, 1};
      cfg.neighborhood_sampler.dims = opt.full_scale ? std::vector<int>{100, 100}
                                                     : std::vector<int>{21, 21};
      break;
    default:
      throw std::invalid_argument("case_id must be 1, 2 or 3");
  }
  return cfg;
}

void write_case_gnuplot(int case_id, const std::string& out_dir) {
  std::ofstream gp(out_dir + "/case" + std::to_string(case_id) + ".gp");
  gp << "set datafile separator ','\n"
     << "set xlabel 'omega [rad]'\nset ylabel 'omegadot [rad/s]'\n"
     << "set zlabel 'u_0 [Nm]'\nset grid\n"
     << "splot 'case" << case_id << "_predictor_corrector.csv' using 1:2:3 every ::1 "
     << "with points pt 7 ps 0.4 title 'augmented policy samples'\n";
}

}  // namespace

CaseOptions::CaseOptions() {
  // Desk-scale horizon; pass mpc.N = 40 for the full-size controller.
  mpc.N = 20;
  pbox.lo = Eigen::Vector2d(0.0, -5.0);
  pbox.hi = Eigen::Vector2d(kTwoPi, 5.0);
}

std::string CaseReport::to_json() const {
  nlohmann::json j;
  j["case_id"] = case_id;
  j["n_exact"] = n_exact;
  j["n_augmented"] = {{"predictor_only", n_augmented_predictor_only},
                      {"predictor_corrector", n_augmented_predictor_corrector}};
  j["n_discarded"] = {{"predictor_only", n_discarded_predictor_only},
                      {"predictor_corrector", n_discarded_predictor_corrector}};
  j["t_exact_s"] = t_exact_s;
  j["t_augment_s"] = {{"predictor_only", t_augment_predictor_only_s},
                      {"predictor_corrector", t_augment_predictor_corrector_s}};
  j["max_error"] = {{"predictor_only", max_error_predictor_only},
                    {"predictor_corrector", max_error_predictor_corrector}};
  j["error_ratio"] = error_ratio;
  j["probe_count"] = probe_count;
  j["seed"] = seed;
  return j.dump(2);
}

GenerateResult run_case_generate(int case_id, const CaseOptions& opt, AugmentMode mode) {
  auto nlp = build_pendulum_nlp(opt.params, opt.mpc);
  return generate(*nlp, opt.pbox, case_config(case_id, opt, mode), opt.solver);
}

CaseReport run_case(int case_id, const CaseOptions& opt) {
  auto nlp = build_pendulum_nlp(opt.params, opt.mpc);
  CaseReport report;
  report.case_id = case_id;
  report.probe_count = opt.probe_count;
  report.seed = opt.seed;
  for (AugmentMode mode : {AugmentMode::predictor_only, AugmentMode::predictor_corrector}) {
    GenerateResult gen = generate(*nlp, opt.pbox, case_config(case_id, opt, mode), opt.solver);
    ProbeReport probe = max_policy_error(gen.dataset, *nlp, opt.solver, opt.probe_count, opt.seed);
    if (!opt.output_dir.empty()) {
      write_dataset_csv(gen.dataset, opt.output_dir + "/case" + std::to_string(case_id) + "_" +
                                         mode_name(mode) + ".csv");
    }
    if (mode == AugmentMode::predictor_only) {
      report.n_exact = gen.report.n_anchors;
      report.n_augmented_predictor_only = gen.report.n_augmented;
      report.n_discarded_predictor_only = gen.report.n_discarded;
      report.t_exact_s = gen.report.t_exact_s;
      report.t_augment_predictor_only_s = gen.report.t_augment_s;
      report.max_error_predictor_only = probe.max_error;
    } else {
      report.n_augmented_predictor_corrector = gen.report.n_augmented;
      report.n_discarded_predictor_corrector = gen.report.n_discarded;
      report.t_augment_predictor_corrector_s = gen.report.t_augment_s;
      report.max_error_predictor_corrector = probe.max_error;
    }
  }
  report.error_ratio = report.max_error_predictor_corrector > 0.0
                           ? report.max_error_predictor_only / report.max_error_predictor_corrector
                           : std::numeric_limits<double>::infinity();
  if (!opt.output_dir.empty()) {
    std::ofstream out(opt.output_dir + "/case" + std::to_string(case_id) + "_report.json");
    out << report.to_json() << "\n";
    write_case_gnuplot(case_id, opt.output_dir);
  }
  return report;
}

double ExpertMpc::operator()(const Eigen::Vector2d& x) {
  last_ = solve(*nlp_, x, warm_, cfg_);
  if (!last_.converged()) {
    // Warm start may be stale after a large state jump; retry cold.
    last_ = solve(*nlp_, x, std::nullopt, cfg_);
  }
  if (!last_.converged()) {
    throw std::runtime_error("expert MPC solve failed at omega=" + std::to_string(x[0]) +
                             ", omegadot=" + std::to_string(x[1]));
  }
  warm_ = last_.point;
  return nlp_->action(last_.point.w)[0];
}

Controller policy_controller(const PolicyModel& model) {
  return [model](const Eigen::Vector2d& x) { return model.predict(x)[0]; };
}

Controller linear_controller(double k_omega, double k_omegadot, double k_const) {
  return [=](const Eigen::Vector2d& x) { return -k_omega * x[0] - k_omegadot * x[1] + k_const; };
}

RolloutTrace closed_loop(const Controller& controller, const PendulumParams& params,
                         const Eigen::Vector2d& x0, double T, double dt) {
  RolloutTrace trace;
  const int steps = static_cast<int>(std::lround(T / dt));
  const int hold_steps = static_cast<int>(std::lround(1.0 / dt));
  Eigen::Vector2d x = x0;
  int in_band = 0;
  for (int k = 0; k < steps; ++k) {
    double u = 0.0;
    try {
      u = controller(x);
    } catch (const std::exception&) {
      trace.aborted = true;
      break;
    }
    u = std::clamp(u, -params.u_max, params.u_max);
    trace.steps.push_back({k * dt, x, u});
    x = plant_step(params, x, u, dt);
    const bool band = std::abs(x[0] - 3.14) <= 0.15 && std::abs(x[1]) <= 0.2;
    in_band = band ? in_band + 1 : 0;
    if (in_band >= hold_steps && !trace.target_reached) {
      trace.target_reached = true;
      trace.time_reached = (k + 1) * dt;
    }
  }
  return trace;
}

void write_trace_csv(const RolloutTrace& trace, const std::string& path) {
  std::ofstream os(path);
  os << "t,omega,omegadot,u\n";
  char buf[160];
  for (const RolloutStep& s : trace.steps) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", s.t, s.x[0], s.x[1], s.u);
    os << buf;
  }
}

void write_trace_gnuplot(const std::string& csv_path, const std::string& gp_path) {
  std::ofstream gp(gp_path);
  gp << "set datafile separator ','\nset xlabel 't [s]'\nset grid\n"
     << "plot '" << csv_path << "' using 1:2 with lines title 'omega', \\\n"
     << "     '" << csv_path << "' using 1:3 with lines title 'omegadot', \\\n"
     << "     '" << csv_path << "' using 1:4 with lines title 'u'\n";
}

ImitationConfig::ImitationConfig() { mpc.N = 20; }

bool ImitationResult::task_achieved() const { return first_success_rollout() >= 0; }

int ImitationResult::first_success_rollout() const {
  for (std::size_t i = 0; i < rollout_success.size(); ++i) {
    if (rollout_success[i]) return static_cast<int>(i) + 1;
  }
  return -1;
}

ImitationResult imitation_loop(const Eigen::Vector3d& initial_policy, const ImitationConfig& cfg) {
  auto nlp = build_pendulum_nlp(cfg.params, cfg.mpc);
  ImitationResult result;
  Dataset data;
  data.n_p = 2;
  data.n_u = 1;
  std::mt19937_64 rng(cfg.seed);
  Controller current = linear_controller(initial_policy[0], initial_policy[1], initial_policy[2]);
  for (int r = 0; r < cfg.rollouts; ++r) {
    RolloutTrace trace = closed_loop(current, cfg.params, Eigen::Vector2d::Zero(), cfg.T, cfg.dt);
    result.rollout_success.push_back(trace.target_reached);
    if (trace.target_reached && cfg.stop_on_success) break;
    // Expert feedback at every visited state, augmented around each one.
    ExpertMpc expert(nlp.get(), cfg.solver);
    for (std::size_t si = 0; si < trace.steps.size();
         si += static_cast<std::size_t>(std::max(1, cfg.feedback_stride))) {
      const RolloutStep& step = trace.steps[si];
      double u_star;
      try {
        u_star = expert(step.x);
      } catch (const std::exception&) {
        ++result.expert_failures;
        expert.reset();
        continue;
      }
      Sample exact;
      exact.p = step.x;
      exact.u = Eigen::VectorXd::Constant(1, u_star);
      exact.kind = PointKind::exact_anchor;
      exact.anchor_id = static_cast<int>(data.samples.size());
      exact.stationarity_norm = expert.last().point.stationarity_norm;
      const int anchor_id = exact.anchor_id;
      data.samples.push_back(exact);
      if (cfg.feedback_augment <= 0) continue;
      SensitivityMatrix H;
      try {
        H = sensitivity_matrix(*nlp, expert.last().point, cfg.solver.comp_margin);
      } catch (const std::exception&) {
        continue;  // irregular feedback point: keep the exact sample only
      }
      CorrectorConfig ccfg;
      ccfg.eps_tol = cfg.eps_tol;
      ccfg.activity_tol = cfg.solver.activity_tol;
      for (int j = 0; j < cfg.feedback_augment; ++j) {
        Eigen::Vector2d dp;
        for (int d = 0; d < 2; ++d) {
          dp[d] = (2.0 * uniform01(rng) - 1.0) * cfg.feedback_half_widths[d];
        }
        CorrectorResult cr = correct(*nlp, predict(expert.last().point, H, dp), ccfg);
        if (cr.status != CorrectorStatus::converged) continue;
        Sample aug;
        aug.p = step.x + dp;
        aug.u = nlp->action(cr.point.w);
        aug.anchor_id = anchor_id;
        aug.stationarity_norm = cr.point.stationarity_norm;
        aug.corrector_iters = cr.iterations;
        data.samples.push_back(aug);
      }
    }
    result.dataset_size_after_rollout.push_back(static_cast<int>(data.samples.size()));
    result.policy = PolicyModel::fit(data);
    current = policy_controller(result.policy);
  }
  return result;
}

}  // namespace sensaug
