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

#ifndef SENSAUG_POLICY_HPP
#define SENSAUG_POLICY_HPP

#include <optional>
#include <string>

#include "sensaug/augmentor.hpp"

namespace sensaug {

struct EmptyDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Gaussian kernel (Nadaraya-Watson) regression over normalized parameter
/// space — the GRNN policy approximator. Immutable after fit.
class PolicyModel {
 public:
  PolicyModel() = default;

  /// Stores all non-discarded samples as kernel centers; bandwidth
  /// defaults to 0.5x the median nearest-neighbor distance among
  /// normalized centers.
  static PolicyModel fit(const Dataset& ds, std::optional<double> bandwidth = std::nullopt);

  Eigen::VectorXd predict(const Eigen::VectorXd& p) const;

  int num_centers() const { return static_cast<int>(centers_.rows()); }
  double bandwidth() const { return bandwidth_; }

  std::string to_json() const;
  static PolicyModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static PolicyModel load(const std::string& path);

 private:
  Eigen::MatrixXd centers_;  // normalized, one row per sample
  Eigen::MatrixXd targets_;  // one row per sample
  double bandwidth_ = 1.0;
  Eigen::VectorXd shift_;
  Eigen::VectorXd scale_;
};

}  // namespace sensaug

#endif  // SENSAUG_POLICY_HPP
