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

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sensaug/harness.hpp"
#include "sensaug/problems.hpp"

namespace {

using nlohmann::json;
using namespace sensaug;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

Eigen::VectorXd as_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

SamplerSpec parse_sampler(const json& j, const std::string& where) {
  require_keys(j, where, {"kind", "dims", "count", "seed"});
  SamplerSpec s;
  const std::string kind = j.value("kind", "grid");
  if (kind == "grid") {
    s.kind = SamplerSpec::Kind::grid;
    if (!j.contains("dims")) throw ConfigError(where + ": grid sampler needs 'dims'");
    s.dims = j.at("dims").get<std::vector<int>>();
  } else if (kind == "uniform_random") {
    s.kind = SamplerSpec::Kind::uniform_random;
    if (!j.contains("count")) throw ConfigError(where + ": random sampler needs 'count'");
    s.count = j.at("count").get<int>();
    s.seed = j.value("seed", std::uint64_t{0});
  } else {
    throw ConfigError(where + ": kind must be 'grid' or 'uniform_random'");
  }
  return s;
}

SolverConfig parse_solver(const json& j) {
  require_keys(j, "solver", {"kkt_tol", "max_iter", "merit_penalty", "regularization_floor",
                             "linesearch_backtrack", "activity_tol", "comp_margin"});
  SolverConfig cfg;
  cfg.kkt_tol = j.value("kkt_tol", cfg.kkt_tol);
  cfg.max_iter = j.value("max_iter", cfg.max_iter);
  cfg.merit_penalty = j.value("merit_penalty", cfg.merit_penalty);
  cfg.regularization_floor = j.value("regularization_floor", cfg.regularization_floor);
  cfg.linesearch_backtrack = j.value("linesearch_backtrack", cfg.linesearch_backtrack);
  cfg.activity_tol = j.value("activity_tol", cfg.activity_tol);
  cfg.comp_margin = j.value("comp_margin", cfg.comp_margin);
  return cfg;
}

std::unique_ptr<ParametricNLP> parse_problem(const json& cfg) {
  const std::string problem = cfg.value("problem", "pendulum");
  if (problem == "oracle-eqp") return make_oracle_eqp();
  if (problem == "oracle-ineq") return make_oracle_ineq();
  if (problem != "pendulum") {
    throw ConfigError("problem must be 'pendulum', 'oracle-eqp' or 'oracle-ineq'");
  }
  PendulumParams params;
  MpcSpec spec;
  if (cfg.contains("pendulum")) {
    const json& p = cfg.at("pendulum");
    require_keys(p, "pendulum",
                 {"m", "l", "b", "grav", "u_max", "N", "dt", "Q", "R", "P_term", "x_ref"});
    params.m = p.value("m", params.m);
    params.l = p.value("l", params.l);
    params.b = p.value("b", params.b);
    params.grav = p.value("grav", params.grav);
    params.u_max = p.value("u_max", params.u_max);
    spec.N = p.value("N", spec.N);
    spec.dt = p.value("dt", spec.dt);
    if (p.contains("Q")) spec.Q = as_vector(p.at("Q"), "pendulum.Q");
    spec.R = p.value("R", spec.R);
    if (p.contains("P_term")) spec.P_term = as_vector(p.at("P_term"), "pendulum.P_term");
    if (p.contains("x_ref")) spec.x_ref = as_vector(p.at("x_ref"), "pendulum.x_ref");
  }
  return build_pendulum_nlp(params, spec);
}

int cmd_generate(const std::string& config_path, const std::string& output,
                 const std::string& report_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file: " + config_path);
  json cfg = json::parse(in);
  require_keys(cfg, "config",
               {"problem", "pendulum", "box", "anchors", "neighborhood", "half_widths", "mode",
                "chaining", "eps_tol", "max_corrector_iters", "activity_tol", "threads",
                "solver"});
  auto nlp = parse_problem(cfg);

  if (!cfg.contains("box")) throw ConfigError("config: missing 'box'");
  require_keys(cfg.at("box"), "box", {"lo", "hi"});
  ParameterBox box;
  box.lo = as_vector(cfg.at("box").at("lo"), "box.lo");
  box.hi = as_vector(cfg.at("box").at("hi"), "box.hi");
  if (box.lo.size() != nlp->n_p || box.hi.size() != nlp->n_p) {
    throw ConfigError("box dimensions do not match the problem's parameter count");
  }

  AugmentConfig acfg;
  if (!cfg.contains("anchors")) throw ConfigError("config: missing 'anchors'");
  acfg.anchor_sampler = parse_sampler(cfg.at("anchors"), "anchors");
  if (!cfg.contains("neighborhood")) throw ConfigError("config: missing 'neighborhood'");
  acfg.neighborhood_sampler = parse_sampler(cfg.at("neighborhood"), "neighborhood");
  if (cfg.contains("half_widths")) {
    acfg.half_widths = as_vector(cfg.at("half_widths"), "half_widths");
  }
  const std::string mode = cfg.value("mode", "predictor_corrector");
  if (mode == "predictor_only") {
    acfg.mode = AugmentMode::predictor_only;
  } else if (mode == "predictor_corrector") {
    acfg.mode = AugmentMode::predictor_corrector;
  } else {
    throw ConfigError("mode must be 'predictor_only' or 'predictor_corrector'");
  }
  const std::string chaining = cfg.value("chaining", "from_anchor");
  if (chaining == "from_anchor") {
    acfg.chaining = Chaining::from_anchor;
  } else if (chaining == "path_following") {
    acfg.chaining = Chaining::path_following;
  } else {
    throw ConfigError("chaining must be 'from_anchor' or 'path_following'");
  }
  acfg.eps_tol = cfg.value("eps_tol", acfg.eps_tol);
  if (acfg.eps_tol <= 0.0) throw ConfigError("eps_tol must be > 0");
  acfg.max_corrector_iters = cfg.value("max_corrector_iters", acfg.max_corrector_iters);
  if (acfg.max_corrector_iters < 1) throw ConfigError("max_corrector_iters must be >= 1");
  acfg.activity_tol = cfg.value("activity_tol", acfg.activity_tol);
  acfg.threads = cfg.value("threads", acfg.threads);

  SolverConfig scfg = cfg.contains("solver") ? parse_solver(cfg.at("solver")) : SolverConfig{};
  GenerateResult result = generate(*nlp, box, acfg, scfg);
  write_dataset_csv(result.dataset, output);
  json rep;
  rep["n_anchors"] = result.report.n_anchors;
  rep["n_anchors_skipped"] = result.report.n_anchors_skipped;
  rep["n_augmented"] = result.report.n_augmented;
  rep["n_discarded"] = result.report.n_discarded;
  rep["n_sensitivity_calls"] = result.report.n_sensitivity_calls;
  rep["t_exact_s"] = result.report.t_exact_s;
  rep["t_augment_s"] = result.report.t_augment_s;
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << rep.dump(2) << "\n";
  }
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& output, double bandwidth) {
  Dataset ds = read_dataset_csv(data_path);
  std::optional<double> bw;
  if (bandwidth > 0.0) bw = bandwidth;
  PolicyModel model = PolicyModel::fit(ds, bw);
  model.save(output);
  std::cout << "{\"centers\": " << model.num_centers() << ", \"bandwidth\": " << model.bandwidth()
            << "}\n";
  return 0;
}

int cmd_case(int case_id, const std::string& output_dir, bool full_scale, int probes,
             std::uint64_t seed, int threads, int horizon) {
  CaseOptions opt;
  opt.full_scale = full_scale;
  opt.probe_count = probes;
  opt.seed = seed;
  opt.threads = threads;
  if (horizon > 0) opt.mpc.N = horizon;
  opt.output_dir = output_dir;
  CaseReport report = run_case(case_id, opt);
  std::cout << report.to_json() << "\n";
  return 0;
}

int cmd_rollout(const std::string& model_path, bool expert, int horizon,
                std::vector<double> x0v, double T, double dt, const std::string& output,
                const std::string& gp_path) {
  if (x0v.size() != 2) throw ConfigError("--x0 needs two numbers: omega omegadot");
  PendulumParams params;
  Controller controller;
  std::unique_ptr<ParametricNLP> nlp;
  std::unique_ptr<ExpertMpc> mpc;
  if (expert) {
    MpcSpec spec;
    if (horizon > 0) spec.N = horizon;
    nlp = build_pendulum_nlp(params, spec);
    mpc = std::make_unique<ExpertMpc>(nlp.get(), SolverConfig{});
    controller = [&mpc](const Eigen::Vector2d& x) { return (*mpc)(x); };
  } else {
    if (model_path.empty()) throw ConfigError("rollout needs --model or --expert");
    PolicyModel model = PolicyModel::load(model_path);
    controller = policy_controller(model);
  }
  RolloutTrace trace = closed_loop(controller, params, Eigen::Vector2d(x0v[0], x0v[1]), T, dt);
  if (!output.empty()) write_trace_csv(trace, output);
  if (!gp_path.empty()) write_trace_gnuplot(output, gp_path);
  json j;
  j["steps"] = trace.steps.size();
  j["target_reached"] = trace.target_reached;
  j["aborted"] = trace.aborted;
  if (trace.target_reached) j["time_reached"] = trace.time_reached;
  std::cout << j.dump(2) << "\n";
  return trace.aborted ? 1 : 0;
}

int cmd_imitate(int rollouts, int feedback, int stride, std::uint64_t seed,
                const std::string& output) {
  ImitationConfig cfg;
  cfg.rollouts = rollouts;
  cfg.feedback_augment = feedback;
  cfg.feedback_stride = stride;
  cfg.seed = seed;
  ImitationResult result = imitation_loop(Eigen::Vector3d(11.0, 7.0, 35.0), cfg);
  json j;
  j["rollout_success"] = result.rollout_success;
  j["dataset_size_after_rollout"] = result.dataset_size_after_rollout;
  j["task_achieved"] = result.task_achieved();
  j["first_success_rollout"] = result.first_success_rollout();
  j["expert_failures"] = result.expert_failures;
  std::cout << j.dump(2) << "\n";
  if (!output.empty() && result.policy.num_centers() > 0) result.policy.save(output);
  return result.task_achieved() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity-based training-data augmentation for MPC policy approximation"};
  app.require_subcommand(1);

  std::string config_path, output, report_path;
  auto* gen = app.add_subcommand("generate", "Generate a training dataset from a JSON config");
  gen->add_option("--config", config_path, "JSON config file")->required();
  gen->add_option("--output", output, "Output dataset CSV")->required();
  gen->add_option("--report", report_path, "Optional JSON run report");

  std::string data_path, model_out;
  double bandwidth = 0.0;
  auto* fit = app.add_subcommand("fit", "Fit a kernel policy to a dataset CSV");
  fit->add_option("--data", data_path, "Dataset CSV")->required();
  fit->add_option("--output", model_out, "Output model JSON")->required();
  fit->add_option("--bandwidth", bandwidth, "Kernel bandwidth override (>0)");

  int case_id = 1, probes = 200, threads = 1, horizon = 0;
  std::uint64_t seed = 1;
  bool full_scale = false;
  std::string output_dir = ".";
  auto* cse = app.add_subcommand("case", "Run a benchmark case (1, 2 or 3)");
  cse->add_option("--case", case_id, "Case id")->check(CLI::Range(1, 3))->required();
  cse->add_option("--output-dir", output_dir, "Directory for datasets, report, plots");
  cse->add_flag("--full-scale", full_scale, "Full-size grids instead of desk-scale");
  cse->add_option("--probes", probes, "Exact re-solves for the error probe");
  cse->add_option("--seed", seed, "Probe subsample seed");
  cse->add_option("--threads", threads, "Worker threads");
  cse->add_option("--horizon", horizon, "MPC horizon length override");

  std::string model_path, trace_out, gp_out;
  bool expert = false;
  std::vector<double> x0v{0.0, 0.0};
  double T = 8.0, dt = 0.05;
  auto* roll = app.add_subcommand("rollout", "Closed-loop pendulum rollout");
  roll->add_option("--model", model_path, "Policy model JSON");
  roll->add_flag("--expert", expert, "Use the exact MPC instead of a fitted policy");
  roll->add_option("--horizon", horizon, "Expert MPC horizon length");
  roll->add_option("--x0", x0v, "Initial state (omega omegadot)")->expected(2);
  roll->add_option("--T", T, "Rollout length [s]");
  roll->add_option("--dt", dt, "Sampling time [s]");
  roll->add_option("--output", trace_out, "Trace CSV path");
  roll->add_option("--gnuplot", gp_out, "Gnuplot script path");

  int rollouts = 25, feedback = 25, stride = 5;
  std::uint64_t im_seed = 7;
  std::string im_out;
  auto* imit = app.add_subcommand("imitate", "Interactive-expert imitation learning loop");
  imit->add_option("--rollouts", rollouts, "Max rollouts");
  imit->add_option("--feedback-augment", feedback, "Augmented samples per expert feedback");
  imit->add_option("--feedback-stride", stride, "Query the expert every k-th visited state");
  imit->add_option("--seed", im_seed, "Sampling seed");
  imit->add_option("--output", im_out, "Final policy model JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(config_path, output, report_path);
    if (fit->parsed()) return cmd_fit(data_path, model_out, bandwidth);
    if (cse->parsed())
      return cmd_case(case_id, output_dir, full_scale, probes, seed, threads, horizon);
    if (roll->parsed())
      return cmd_rollout(model_path, expert, horizon, x0v, T, dt, trace_out, gp_out);
    if (imit->parsed()) return cmd_imitate(rollouts, feedback, stride, im_seed, im_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
