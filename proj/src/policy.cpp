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

#include "sensaug/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sensaug {

PolicyModel PolicyModel::fit(const Dataset& ds, std::optional<double> bandwidth) {
  std::vector<const Sample*> kept;
  for (const auto& s : ds.samples)
    if (!s.discarded) kept.push_back(&s);
  if (kept.empty()) throw EmptyDataset("PolicyModel::fit: no non-discarded samples");

  PolicyModel m;
  const int n = static_cast<int>(kept.size());
  const int n_p = ds.n_p;
  const int n_u = ds.n_u;
  m.centers_.resize(n, n_p);
  m.targets_.resize(n, n_u);
  for (int i = 0; i < n; ++i) {
    m.centers_.row(i) = kept[static_cast<std::size_t>(i)]->p.transpose();
    m.targets_.row(i) = kept[static_cast<std::size_t>(i)]->u.transpose();
  }

  // Per-dimension normalization to zero mean, unit spread.
  m.shift_ = m.centers_.colwise().mean();
  m.scale_.resize(n_p);
  for (int d = 0; d < n_p; ++d) {
    const double var =
        (m.centers_.col(d).array() - m.shift_[d]).square().sum() / std::max(1, n - 1);
    m.scale_[d] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  for (int d = 0; d < n_p; ++d)
    m.centers_.col(d) = (m.centers_.col(d).array() - m.shift_[d]) / m.scale_[d];

  if (bandwidth) {
    if (*bandwidth <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
    m.bandwidth_ = *bandwidth;
  } else if (n == 1) {
    m.bandwidth_ = 1.0;
  } else {
    std::vector<double> nn(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double d = (m.centers_.row(i) - m.centers_.row(j)).norm();
        nn[static_cast<std::size_t>(i)] = std::min(nn[static_cast<std::size_t>(i)], d);
        nn[static_cast<std::size_t>(j)] = std::min(nn[static_cast<std::size_t>(j)], d);
      }
    }
    std::nth_element(nn.begin(), nn.begin() + n / 2, nn.end());
    const double median = nn[static_cast<std::size_t>(n / 2)];
    m.bandwidth_ = median > 0.0 ? 0.5 * median : 1.0;
  }
  return m;
}

Eigen::VectorXd PolicyModel::predict(const Eigen::VectorXd& p) const {
  if (p.size() != shift_.size())
    throw std::invalid_argument("PolicyModel::predict: dimension mismatch");
  const Eigen::RowVectorXd q =
      ((p - shift_).array() / scale_.array()).matrix().transpose();
  const Eigen::VectorXd d2 = (centers_.rowwise() - q).rowwise().squaredNorm();
  // Shift by the minimum exponent so far-field queries never underflow to
  // an all-zero weight vector.
  const double d2min = d2.minCoeff();
  const Eigen::ArrayXd wgt =
      (-(d2.array() - d2min) / (2.0 * bandwidth_ * bandwidth_)).exp();
  return (targets_.transpose() * wgt.matrix()) / wgt.sum();
}

std::string PolicyModel::to_json() const {
  nlohmann::json j;
  j["normalization"]["shift"] = std::vector<double>(shift_.data(), shift_.data() + shift_.size());
  j["normalization"]["scale"] = std::vector<double>(scale_.data(), scale_.data() + scale_.size());
  j["bandwidth"] = bandwidth_;
  for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
    j["centers"].push_back(std::vector<double>(centers_.row(i).begin(), centers_.row(i).end()));
    j["targets"].push_back(std::vector<double>(targets_.row(i).begin(), targets_.row(i).end()));
  }
  return j.dump(2);
}

PolicyModel PolicyModel::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  PolicyModel m;
  const auto shift = j.at("normalization").at("shift").get<std::vector<double>>();
  const auto scale = j.at("normalization").at("scale").get<std::vector<double>>();
  m.shift_ = Eigen::Map<const Eigen::VectorXd>(shift.data(), static_cast<Eigen::Index>(shift.size()));
  m.scale_ = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  m.bandwidth_ = j.at("bandwidth").get<double>();
  const auto& centers = j.at("centers");
  const auto& targets = j.at("targets");
  m.centers_.resize(static_cast<Eigen::Index>(centers.size()), m.shift_.size());
  m.targets_.resize(static_cast<Eigen::Index>(targets.size()),
                    static_cast<Eigen::Index>(targets.empty() ? 0 : targets[0].size()));
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto c = centers[i].get<std::vector<double>>();
    const auto t = targets[i].get<std::vector<double>>();
    for (std::size_t d = 0; d < c.size(); ++d)
      m.centers_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = c[d];
    for (std::size_t d = 0; d < t.size(); ++d)
      m.targets_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = t[d];
  }
  return m;
}

void PolicyModel::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << to_json() << "\n";
}

PolicyModel PolicyModel::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

}  // namespace sensaug
