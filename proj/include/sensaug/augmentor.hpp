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

#ifndef SENSAUG_AUGMENTOR_HPP
#define SENSAUG_AUGMENTOR_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "sensaug/sensitivity.hpp"
#include "sensaug/sqp.hpp"

namespace sensaug {

struct ParameterBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct SamplerSpec {
  enum class Kind { grid, uniform_random } kind = Kind::grid;
  std::vector<int> dims;       // grid: points per dimension
  int count = 0;               // uniform_random
  std::uint64_t seed = 0;      // uniform_random
};

enum class AugmentMode { predictor_only, predictor_corrector };
enum class Chaining { from_anchor, path_following };

struct AugmentConfig {
  SamplerSpec anchor_sampler;
  SamplerSpec neighborhood_sampler;
  // Per-dimension half-widths of the box around each anchor. Empty with
  // grid anchors: defaults to half the anchor spacing so boxes tile the
  // parameter box.
  Eigen::VectorXd half_widths;
  double eps_tol = 1e-6;
  AugmentMode mode = AugmentMode::predictor_corrector;
  Chaining chaining = Chaining::from_anchor;
  int max_corrector_iters = 10;
  double activity_tol = kDefaultActivityTol;
  int threads = 1;
};

struct Sample {
  Eigen::VectorXd p;
  Eigen::VectorXd u;
  PointKind kind = PointKind::augmented;
  int anchor_id = -1;
  double stationarity_norm = std::numeric_limits<double>::quiet_NaN();
  int corrector_iters = 0;
  bool discarded = false;
  std::string reason;  // active_set_changed | corrector_diverged | max_iters
};

struct Dataset {
  int n_p = 0;
  int n_u = 0;
  std::vector<Sample> samples;
  std::size_t valid_count() const;
};

struct RunReport {
  int n_anchors = 0;          // successful anchors
  int n_anchors_skipped = 0;  // solver/regularity failures
  int n_augmented = 0;        // non-discarded augmented samples
  int n_discarded = 0;
  double t_exact_s = 0.0;
  double t_augment_s = 0.0;
  int n_sensitivity_calls = 0;
  double max_error = std::numeric_limits<double>::quiet_NaN();  // set when probed
  std::vector<std::string> anchor_log;
};

struct GenerateResult {
  Dataset dataset;
  RunReport report;
};

/// Anchor placement, exact solves, predictor(-corrector) augmentation and
/// discard filtering over the parameter box. Discarded samples stay in the
/// dataset with a reason. Deterministic for fixed seeds.
GenerateResult generate(const ParametricNLP& nlp, const ParameterBox& pbox,
                        const AugmentConfig& cfg, const SolverConfig& solver_cfg);

struct ProbeReport {
  double max_error = 0.0;
  int probes = 0;
  int failures = 0;
  double t_resolve_s = 0.0;
};

/// Re-solves the NLP exactly at `subsample` randomly chosen non-discarded
/// augmented points and reports max ||u_hat - u*||.
ProbeReport max_policy_error(const Dataset& ds, const ParametricNLP& nlp,
                             const SolverConfig& solver_cfg, int subsample, std::uint64_t seed);

void write_dataset_csv(const Dataset& ds, std::ostream& os);
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(std::istream& is);
Dataset read_dataset_csv(const std::string& path);

/// Evenly spaced grid / seeded uniform samples over a box. Grid points sit
/// at cell centers so anchor boxes with half-spacing half-widths tile the
/// box exactly.
std::vector<Eigen::VectorXd> sample_box(const ParameterBox& box, const SamplerSpec& sampler,
                                        bool cell_centers);

/// Deterministic uniform double in [0, 1) from a seeded generator,
/// independent of the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng);

}  // namespace sensaug

#endif  // SENSAUG_AUGMENTOR_HPP
