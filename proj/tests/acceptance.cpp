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

// Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.
// Exits nonzero when any criterion fails.

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sensaug/harness.hpp>
#include <sensaug/problems.hpp>

using namespace sensaug;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

PrimalDualPoint solve_or_throw(const ParametricNLP& nlp, const Eigen::VectorXd& p,
                               const SolverConfig& cfg,
                               const std::optional<PrimalDualPoint>& warm = std::nullopt) {
  SolveResult r = solve(nlp, p, warm, cfg);
  std::ostringstream os;
  os << "solve failed at p = " << p.transpose();
  require(r.converged(), os.str());
  return r.point;
}

// ---------------------------------------------------------------- AC-1
// Hand-derived sensitivity and exactness of the linear predictor on an
// equality-constrained quadratic whose solution manifold is affine in p.
void ac1() {
  auto nlp = make_oracle_eqp();
  SolverConfig cfg;
  PrimalDualPoint s = solve_or_throw(*nlp, Eigen::VectorXd::Constant(1, 1.0), cfg);
  SensitivityMatrix H = sensitivity_matrix(*nlp, s);
  Eigen::Vector3d expected(0.5, 0.5, -0.5);
  require((H.H.col(0) - expected).lpNorm<Eigen::Infinity>() <= 1e-10,
          "sensitivity column mismatch");
  for (double dp : {-10.0, -3.7, -0.5, 0.25, 4.0, 10.0}) {
    PrimalDualPoint hat = predict(s, H, Eigen::VectorXd::Constant(1, dp));
    PrimalDualPoint exact = solve_or_throw(*nlp, s.p.array() + dp, cfg);
    require((hat.w - exact.w).lpNorm<Eigen::Infinity>() <= 1e-10 &&
                (hat.lambda - exact.lambda).lpNorm<Eigen::Infinity>() <= 1e-10,
            "predictor error > 1e-10 at dp = " + std::to_string(dp));
  }
}

// ---------------------------------------------------------------- AC-2
// Sensitivity columns against central finite differences of exact
// re-solves on five swing-up anchors.
void ac2() {
  MpcSpec spec;
  spec.N = 20;
  auto nlp = build_pendulum_nlp({}, spec);
  SolverConfig cfg;
  const double h = 1e-5;
  const std::vector<Eigen::Vector2d> anchors = {
      {1.2, 0.8}, {3.0, -1.0}, {0.5, 0.0}, {2.4, -2.0}, {4.2, 1.5}};
  for (const Eigen::Vector2d& p : anchors) {
    PrimalDualPoint s = solve_or_throw(*nlp, p, cfg);
    SensitivityMatrix H = sensitivity_matrix(*nlp, s);
    const int n_a = static_cast<int>(s.active_set.size());
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e[j] = h;
      PrimalDualPoint sp = solve_or_throw(*nlp, p + e, cfg, s);
      PrimalDualPoint sm = solve_or_throw(*nlp, p - e, cfg, s);
      require(sp.active_set == s.active_set && sm.active_set == s.active_set,
              "active set changed inside the finite-difference stencil");
      Eigen::VectorXd fd(nlp->n_w + nlp->n_c + n_a);
      fd.head(nlp->n_w) = (sp.w - sm.w) / (2 * h);
      fd.segment(nlp->n_w, nlp->n_c) = (sp.lambda - sm.lambda) / (2 * h);
      for (int k = 0; k < n_a; ++k) {
        const int g = s.active_set[static_cast<std::size_t>(k)];
        fd[nlp->n_w + nlp->n_c + k] = (sp.mu[g] - sm.mu[g]) / (2 * h);
      }
      const double rel = (H.H.col(j) - fd).norm() / std::max(1.0, fd.norm());
      std::ostringstream os;
      os << "column " << j << " at p = (" << p.transpose() << "): rel err " << rel;
      require(rel <= 1e-4, os.str());
    }
  }
}

// ---------------------------------------------------------------- AC-3
// Second-order remainder of the linear predictor: the error against exact
// re-solves must shrink quadratically along directions whose re-solves
// keep the anchor active set.
void ac3() {
  MpcSpec spec;
  spec.N = 20;
  auto nlp = build_pendulum_nlp({}, spec);
  SolverConfig cfg;
  const std::vector<double> mags = {0.2, 0.1, 0.05, 0.025};
  const std::vector<Eigen::Vector2d> candidates = {
      {1.2, 0.8}, {3.0, -1.0}, {2.4, -2.0}, {0.8, 0.3}, {4.2, 1.5}};
  int directions_checked = 0;
  for (const Eigen::Vector2d& anchor_p : candidates) {
    SolveResult ar = solve(*nlp, anchor_p, std::nullopt, cfg);
    if (!ar.converged() || !ar.regularity.pass()) continue;
    const PrimalDualPoint& s = ar.point;
    SensitivityMatrix H = sensitivity_matrix(*nlp, s);
    for (double deg : {0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0}) {
      const double th = deg * M_PI / 180.0;
      const Eigen::Vector2d d(std::cos(th), std::sin(th));
      std::vector<double> errs;
      bool usable = true;
      for (double r : mags) {
        SolveResult re = solve(*nlp, anchor_p + r * d, std::nullopt, cfg);
        if (!re.converged() || re.point.active_set != s.active_set) {
          usable = false;
          break;
        }
        PrimalDualPoint hat = predict(s, H, r * d);
        const double err = (hat.w - re.point.w).norm();
        if (err <= 1e-12) {
          usable = false;  // flat direction, slope undefined
          break;
        }
        errs.push_back(err);
      }
      if (!usable) continue;
      // Least-squares slope of ln err against ln r.
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < mags.size(); ++i) {
        const double x = std::log(mags[i]);
        const double y = std::log(errs[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
      }
      const double n = static_cast<double>(mags.size());
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      std::ostringstream os;
      os << "slope " << slope << " at p = (" << anchor_p.transpose() << "), dir " << deg;
      require(slope >= 1.7 && slope <= 2.3, os.str());
      if (++directions_checked >= 3) return;
    }
  }
  require(directions_checked >= 3, "fewer than 3 usable directions found");
}

// ---------------------------------------------------------------- AC-4
// Corrector enforcement: every retained augmented sample of a
// predictor-corrector run satisfies the residual tolerance, verified by
// re-deriving each sample from its CSV row (anchor parameter and offset)
// and re-evaluating the full stationarity/feasibility residual with the
// independent kkt_residual routine.
void verify_corrector_csv(const ParametricNLP& nlp, const ParameterBox& pbox,
                          const AugmentConfig& acfg, const SolverConfig& scfg) {
  GenerateResult g = generate(nlp, pbox, acfg, scfg);
  std::stringstream csv;
  write_dataset_csv(g.dataset, csv);
  Dataset ds = read_dataset_csv(csv);

  std::map<int, PrimalDualPoint> anchors;
  std::map<int, SensitivityMatrix> sens;
  for (const Sample& smp : ds.samples) {
    if (smp.kind != PointKind::exact_anchor) continue;
    PrimalDualPoint s = solve_or_throw(nlp, smp.p, scfg);
    sens[smp.anchor_id] = sensitivity_matrix(nlp, s, scfg.comp_margin);
    anchors[smp.anchor_id] = std::move(s);
  }
  CorrectorConfig ccfg;
  ccfg.eps_tol = acfg.eps_tol;
  ccfg.max_corrector_iters = acfg.max_corrector_iters;
  ccfg.activity_tol = acfg.activity_tol;
  int checked = 0;
  for (const Sample& smp : ds.samples) {
    if (smp.kind != PointKind::augmented || smp.discarded) continue;
    require(smp.stationarity_norm <= acfg.eps_tol, "CSV stationarity above eps_tol");
    auto it = anchors.find(smp.anchor_id);
    require(it != anchors.end(), "augmented row references unknown anchor");
    CorrectorResult cr =
        correct(nlp, predict(it->second, sens.at(smp.anchor_id), smp.p - it->second.p), ccfg);
    require(cr.status == CorrectorStatus::converged, "re-derived corrector did not converge");
    PrimalDualPoint pt = cr.point;
    const double phi = kkt_residual(nlp, pt).lpNorm<Eigen::Infinity>();
    require(phi <= acfg.eps_tol, "re-evaluated residual " + std::to_string(phi));
    require((nlp.action(cr.point.w) - smp.u).lpNorm<Eigen::Infinity>() <= 1e-9,
            "re-derived action disagrees with CSV");
    ++checked;
  }
  require(checked > 0, "no retained augmented samples to check");
}

void ac4() {
  SolverConfig scfg;
  {
    auto nlp = make_oracle_ineq();
    ParameterBox pbox{Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 2.0)};
    AugmentConfig acfg;
    acfg.anchor_sampler.dims = {4};
    acfg.neighborhood_sampler.kind = SamplerSpec::Kind::uniform_random;
    acfg.neighborhood_sampler.count = 25;
    acfg.neighborhood_sampler.seed = 3;
    acfg.half_widths = Eigen::VectorXd::Constant(1, 0.2);
    verify_corrector_csv(*nlp, pbox, acfg, scfg);
  }
  {
    MpcSpec spec;
    spec.N = 20;
    auto nlp = build_pendulum_nlp({}, spec);
    ParameterBox pbox{Eigen::Vector2d(0.0, -5.0), Eigen::Vector2d(2 * M_PI, 5.0)};
    AugmentConfig acfg;
    acfg.anchor_sampler.dims = {2, 2};
    acfg.neighborhood_sampler.dims = {3, 3};
    acfg.half_widths = Eigen::Vector2d(0.5, 1.0);
    verify_corrector_csv(*nlp, pbox, acfg, scfg);
  }
}

// ---------------------------------------------------------------- AC-5
// Predictor-only versus predictor-corrector max policy error ratios on
// the desk-scale benchmark cases.
void ac5() {
  CaseOptions opt;
  CaseReport c2 = run_case(2, opt);
  require(c2.error_ratio >= 10.0, "case 2 ratio " + std::to_string(c2.error_ratio));
  CaseReport c3 = run_case(3, opt);
  require(c3.error_ratio >= 100.0, "case 3 ratio " + std::to_string(c3.error_ratio));
}

// ---------------------------------------------------------------- AC-6
// Augmentation at least 5x faster than exactly re-solving the same
// points, on a case with >= 25 retained samples per anchor.
void ac6() {
  CaseOptions opt;
  GenerateResult g = run_case_generate(3, opt, AugmentMode::predictor_corrector);
  std::vector<const Sample*> aug_rows;
  for (const Sample& smp : g.dataset.samples)
    if (smp.kind == PointKind::augmented) aug_rows.push_back(&smp);
  require(g.report.n_anchors >= 1 &&
              static_cast<int>(aug_rows.size()) >= 25 * g.report.n_anchors,
          "case does not meet the >=25 samples/anchor precondition");
  auto nlp = build_pendulum_nlp(opt.params, opt.mpc);
  const auto t0 = std::chrono::steady_clock::now();
  for (const Sample* smp : aug_rows) solve(*nlp, smp->p, std::nullopt, opt.solver);
  const double t_resolve = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream os;
  os << "t_augment " << g.report.t_augment_s << "s vs exact re-solve of the same "
     << aug_rows.size() << " points " << t_resolve << "s";
  require(g.report.t_augment_s <= t_resolve / 5.0, os.str());
  std::printf("      [AC-6 detail] %s\n", os.str().c_str());
}

// ---------------------------------------------------------------- AC-7
// Closed loop: the fitted policy and the exact-MPC expert both swing the
// pendulum up from rest within 10 simulated seconds.
void ac7() {
  CaseOptions opt;
  GenerateResult g = run_case_generate(1, opt, AugmentMode::predictor_corrector);
  PolicyModel model = PolicyModel::fit(g.dataset);
  RolloutTrace pol =
      closed_loop(policy_controller(model), opt.params, Eigen::Vector2d(0, 0), 10.0, 0.05);
  require(pol.target_reached && !pol.aborted, "policy rollout missed the target");
  auto nlp = build_pendulum_nlp(opt.params, opt.mpc);
  ExpertMpc expert(nlp.get(), opt.solver);
  RolloutTrace exp = closed_loop([&](const Eigen::Vector2d& x) { return expert(x); }, opt.params,
                                 Eigen::Vector2d(0, 0), 10.0, 0.05);
  require(exp.target_reached && !exp.aborted, "expert rollout missed the target");
  std::printf("      [AC-7 detail] policy reached at %.2fs, expert at %.2fs\n", pol.time_reached,
              exp.time_reached);
}

// ---------------------------------------------------------------- AC-8
// Piecewise-affine oracle with a kink at p = 1: samples across the kink
// must be discarded as active-set changes, retained ones must match the
// closed form w*(p) = p.
void ac8() {
  auto nlp = make_oracle_ineq();
  ParameterBox pbox{Eigen::VectorXd::Constant(1, -0.5), Eigen::VectorXd::Constant(1, 1.5)};
  AugmentConfig acfg;
  acfg.anchor_sampler.dims = {1};  // single anchor at the box center, p = 0.5
  acfg.neighborhood_sampler.dims = {41};
  acfg.half_widths = Eigen::VectorXd::Constant(1, 1.0);
  GenerateResult g = generate(*nlp, pbox, acfg, SolverConfig{});
  require(g.report.n_anchors == 1, "anchor solve failed");
  int above = 0, retained = 0;
  for (const Sample& smp : g.dataset.samples) {
    if (smp.kind != PointKind::augmented) continue;
    if (smp.p[0] > 1.0) {
      ++above;
      require(smp.discarded && smp.reason == "active_set_changed",
              "sample at p = " + std::to_string(smp.p[0]) + " not discarded as active_set_changed");
    } else if (!smp.discarded) {
      ++retained;
      require(std::abs(smp.u[0] - smp.p[0]) <= 1e-8,
              "retained sample off the closed form at p = " + std::to_string(smp.p[0]));
    }
  }
  require(above > 0 && retained > 0, "degenerate sample split");
}

// ---------------------------------------------------------------- AC-9
// Quadratic tail of the corrector on random predictor outputs.
void ac9() {
  MpcSpec spec;
  spec.N = 20;
  auto nlp = build_pendulum_nlp({}, spec);
  SolverConfig cfg;
  std::mt19937_64 rng(42);
  int converged_fast = 0, total = 0, slope_checked = 0;
  while (total < 20) {
    Eigen::Vector2d p(0.5 + uniform01(rng) * (2 * M_PI - 1.0), -4.0 + uniform01(rng) * 8.0);
    SolveResult ar = solve(*nlp, p, std::nullopt, cfg);
    if (!ar.converged() || !ar.regularity.pass()) continue;
    const double th = uniform01(rng) * 2 * M_PI;
    SensitivityMatrix H = sensitivity_matrix(*nlp, ar.point);
    PrimalDualPoint hat =
        predict(ar.point, H, 0.3 * Eigen::Vector2d(std::cos(th), std::sin(th)));
    CorrectorResult cr = correct(*nlp, hat, CorrectorConfig{});
    ++total;
    const bool residual_converged =
        cr.status == CorrectorStatus::converged || cr.status == CorrectorStatus::active_set_changed;
    if (residual_converged && cr.iterations <= 10) ++converged_fast;
    const auto& hist = cr.residual_history;
    if (residual_converged && hist.size() >= 3 && hist.back() > 1e-13) {
      const double r2 = hist[hist.size() - 1], r1 = hist[hist.size() - 2],
                   r0 = hist[hist.size() - 3];
      const double slope = std::log(r2 / r1) / std::log(r1 / r0);
      require(slope >= 1.8, "final contraction slope " + std::to_string(slope));
      ++slope_checked;
    }
  }
  std::ostringstream os;
  os << converged_fast << "/20 converged within 10 iterations, " << slope_checked
     << " slope checks";
  require(converged_fast >= 19, os.str());
  require(slope_checked >= 5, os.str());
  std::printf("      [AC-9 detail] %s\n", os.str().c_str());
}

// ---------------------------------------------------------------- AC-10
// Interactive imitation: with sensitivity augmentation around each expert
// feedback the swing-up is learned in strictly fewer rollouts than with
// expert feedback alone, under identical seeds.
void ac10() {
  const Eigen::Vector3d initial(-11.0, -7.0, 35.0);
  ImitationConfig with_aug;
  with_aug.feedback_augment = 25;
  ImitationConfig without_aug = with_aug;
  without_aug.feedback_augment = 0;
  ImitationResult a = imitation_loop(initial, with_aug);
  ImitationResult b = imitation_loop(initial, without_aug);
  const int ra = a.first_success_rollout();
  const int rb = b.first_success_rollout();
  std::printf("      [AC-10 detail] augmented: rollout %d, expert-only: %s\n", ra,
              rb < 0 ? "never (25 rollouts)" : std::to_string(rb).c_str());
  require(a.task_achieved() && ra >= 1 && ra <= 25, "augmented arm failed within 25 rollouts");
  require(rb < 0 || rb > ra, "no separation between arms");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"AC-1", ac1}, {"AC-2", ac2}, {"AC-3", ac3}, {"AC-4", ac4}, {"AC-5", ac5},
      {"AC-6", ac6}, {"AC-7", ac7}, {"AC-8", ac8}, {"AC-9", ac9}, {"AC-10", ac10}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    try {
      fn();
      std::printf("%s PASS\n", name.c_str());
    } catch (const std::exception& e) {
      std::printf("%s FAIL (%s)\n", name.c_str(), e.what());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
