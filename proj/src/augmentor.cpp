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

#include "sensaug/augmentor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

namespace sensaug {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void grid_recurse(const ParameterBox& box, const std::vector<int>& dims, bool cell_centers,
                  Eigen::VectorXd& point, int d, std::vector<Eigen::VectorXd>& out) {
  const int n = dims[static_cast<std::size_t>(d)];
  for (int i = 0; i < n; ++i) {
    double t;
    if (cell_centers) {
      t = (i + 0.5) / n;
    } else {
      t = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
    }
    point[d] = box.lo[d] + t * (box.hi[d] - box.lo[d]);
    if (d + 1 == static_cast<int>(dims.size()))
      out.push_back(point);
    else
      grid_recurse(box, dims, cell_centers, point, d + 1, out);
  }
}

std::string reason_of(CorrectorStatus st) {
  switch (st) {
    case CorrectorStatus::active_set_changed:
      return "active_set_changed";
    case CorrectorStatus::max_iters:
      return "max_iters";
    default:
      return "corrector_diverged";
  }
}

struct AnchorResult {
  std::vector<Sample> samples;
  bool ok = false;
  std::string log;
  double t_exact = 0.0;
  double t_augment = 0.0;
  int sensitivity_calls = 0;
};

AnchorResult process_anchor(const ParametricNLP& nlp, const Eigen::VectorXd& p_anchor,
                            int anchor_id, const std::vector<Eigen::VectorXd>& dps,
                            const AugmentConfig& cfg, const SolverConfig& solver_cfg) {
  AnchorResult out;
  auto t0 = Clock::now();
  SolveResult sol = solve(nlp, p_anchor, std::nullopt, solver_cfg);
  out.t_exact = seconds_since(t0);
  if (sol.status != SolveStatus::converged) {
    std::ostringstream os;
    os << "anchor " << anchor_id << " skipped: "
       << (sol.status == SolveStatus::regularity_failure ? "regularity failure"
                                                         : "solver did not converge")
       << " (kkt error " << sol.kkt_error << ")";
    out.log = os.str();
    return out;
  }
  const PrimalDualPoint& anchor = sol.point;

  Sample anchor_sample;
  anchor_sample.p = anchor.p;
  anchor_sample.u = nlp.action(anchor.w);
  anchor_sample.kind = PointKind::exact_anchor;
  anchor_sample.anchor_id = anchor_id;
  anchor_sample.stationarity_norm = anchor.stationarity_norm;
  out.samples.push_back(std::move(anchor_sample));

  t0 = Clock::now();
  SensitivityMatrix H;
  try {
    H = sensitivity_matrix(nlp, anchor, solver_cfg.comp_margin);
    out.sensitivity_calls = 1;
  } catch (const std::exception& e) {
    out.log = "anchor " + std::to_string(anchor_id) + " skipped: " + e.what();
    out.samples.clear();
    out.t_augment = seconds_since(t0);
    return out;
  }

  CorrectorConfig ccfg;
  ccfg.eps_tol = cfg.eps_tol;
  ccfg.max_corrector_iters = cfg.max_corrector_iters;
  ccfg.activity_tol = cfg.activity_tol;

  // Path-following state: corrected points usable as prediction bases,
  // with lazily computed local sensitivities.
  std::vector<PrimalDualPoint> bases{anchor};
  std::vector<Eigen::MatrixXd> base_H{H.H};
  std::vector<bool> base_H_ready{true};

  for (const Eigen::VectorXd& dp : dps) {
    Sample smp;
    smp.anchor_id = anchor_id;
    smp.kind = PointKind::augmented;
    smp.p = anchor.p + dp;

    PrimalDualPoint predicted;
    int base_idx = 0;
    if (cfg.chaining == Chaining::from_anchor) {
      predicted = predict(anchor, H, dp);
    } else {
      // Nearest already-corrected neighbor.
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < bases.size(); ++b) {
        const double d = (bases[b].p - smp.p).norm();
        if (d < best) {
          best = d;
          base_idx = static_cast<int>(b);
        }
      }
      const PrimalDualPoint& base = bases[static_cast<std::size_t>(base_idx)];
      if (!base_H_ready[static_cast<std::size_t>(base_idx)]) {
        try {
          const auto fac = assemble_kkt(nlp, base);
          base_H[static_cast<std::size_t>(base_idx)] =
              fac->solve(Eigen::MatrixXd(-kkt_rhs_p(nlp, base)));
          base_H_ready[static_cast<std::size_t>(base_idx)] = true;
        } catch (const SingularKKT&) {
          smp.discarded = true;
          smp.reason = "corrector_diverged";
          smp.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nlp.action_indices.size()));
          out.samples.push_back(std::move(smp));
          continue;
        }
      }
      SensitivityMatrix local;
      local.H = base_H[static_cast<std::size_t>(base_idx)];
      local.active_set = base.active_set;
      predicted = predict(base, local, smp.p - base.p);
    }

    if (cfg.mode == AugmentMode::predictor_only) {
      PrimalDualPoint pt = predicted;
      try {
        kkt_residual(nlp, pt);  // records stationarity for the dataset row
        smp.stationarity_norm = pt.stationarity_norm;
        if (validate_active_set(nlp, pt, cfg.activity_tol) == ActiveSetValidity::changed) {
          smp.discarded = true;
          smp.reason = "active_set_changed";
        }
      } catch (const EvalDomainError&) {
        smp.discarded = true;
        smp.reason = "corrector_diverged";
      }
      smp.u = nlp.action(pt.w);
    } else {
      const CorrectorResult cr = correct(nlp, predicted, ccfg, H.kkt_factorization.get());
      smp.u = nlp.action(cr.point.w);
      smp.stationarity_norm = cr.point.stationarity_norm;
      smp.corrector_iters = cr.iterations;
      if (cr.status != CorrectorStatus::converged) {
        smp.discarded = true;
        smp.reason = reason_of(cr.status);
      } else if (cfg.chaining == Chaining::path_following) {
        bases.push_back(cr.point);
        base_H.emplace_back();
        base_H_ready.push_back(false);
      }
    }
    out.samples.push_back(std::move(smp));
  }
  out.t_augment = seconds_since(t0);
  out.ok = true;
  return out;
}

}  // namespace

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Eigen::VectorXd> sample_box(const ParameterBox& box, const SamplerSpec& sampler,
                                        bool cell_centers) {
  const int dim = static_cast<int>(box.lo.size());
  std::vector<Eigen::VectorXd> out;
  if (sampler.kind == SamplerSpec::Kind::grid) {
    if (static_cast<int>(sampler.dims.size()) != dim)
      throw std::invalid_argument("sample_box: grid dims rank mismatch");
    Eigen::VectorXd point(dim);
    grid_recurse(box, sampler.dims, cell_centers, point, 0, out);
  } else {
    std::mt19937_64 rng(sampler.seed);
    for (int i = 0; i < sampler.count; ++i) {
      Eigen::VectorXd p(dim);
      for (int d = 0; d < dim; ++d) p[d] = box.lo[d] + uniform01(rng) * (box.hi[d] - box.lo[d]);
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::size_t Dataset::valid_count() const {
  std::size_t n = 0;
  for (const auto& s : samples)
    if (!s.discarded) ++n;
  return n;
}

GenerateResult generate(const ParametricNLP& nlp, const ParameterBox& pbox,
                        const AugmentConfig& cfg, const SolverConfig& solver_cfg) {
  if (pbox.lo.size() != nlp.n_p || pbox.hi.size() != nlp.n_p)
    throw std::invalid_argument("generate: parameter box dimension mismatch");
  if (!pbox.lo.allFinite() || !pbox.hi.allFinite())
    throw std::invalid_argument("generate: parameter box must be finite");

  const std::vector<Eigen::VectorXd> anchors = sample_box(pbox, cfg.anchor_sampler, true);

  Eigen::VectorXd hw = cfg.half_widths;
  if (hw.size() == 0) {
    if (cfg.anchor_sampler.kind != SamplerSpec::Kind::grid)
      throw std::invalid_argument("generate: half_widths required for random anchors");
    hw.resize(nlp.n_p);
    for (int d = 0; d < nlp.n_p; ++d)
      hw[d] = (pbox.hi[d] - pbox.lo[d]) / (2.0 * cfg.anchor_sampler.dims[static_cast<std::size_t>(d)]);
  }
  if ((hw.array() <= 0).any()) throw std::invalid_argument("generate: half_widths must be > 0");

  // Per-anchor perturbation sets (seeded per anchor, so the result does not
  // depend on the number of threads).
  std::vector<std::vector<Eigen::VectorXd>> anchor_dps(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    ParameterBox nb{-hw, hw};
    SamplerSpec ns = cfg.neighborhood_sampler;
    ns.seed = cfg.neighborhood_sampler.seed + 0x9e3779b97f4a7c15ull * (i + 1);
    anchor_dps[i] = sample_box(nb, ns, false);
  }

  GenerateResult res;
  res.dataset.n_p = nlp.n_p;
  res.dataset.n_u = static_cast<int>(nlp.action_indices.size());

  std::vector<AnchorResult> results(anchors.size());
  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < anchors.size(); ++i)
      results[i] = process_anchor(nlp, anchors[i], static_cast<int>(i), anchor_dps[i], cfg,
                                  solver_cfg);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= anchors.size()) return;
        results[i] = process_anchor(nlp, anchors[i], static_cast<int>(i), anchor_dps[i], cfg,
                                    solver_cfg);
      }
    };
    std::vector<std::future<void>> futs;
    for (int t = 0; t < threads; ++t) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }

  for (auto& r : results) {
    res.report.t_exact_s += r.t_exact;
    res.report.t_augment_s += r.t_augment;
    res.report.n_sensitivity_calls += r.sensitivity_calls;
    if (!r.ok) {
      ++res.report.n_anchors_skipped;
      if (!r.log.empty()) res.report.anchor_log.push_back(r.log);
      continue;
    }
    ++res.report.n_anchors;
    for (auto& s : r.samples) {
      if (s.kind == PointKind::augmented) {
        if (s.discarded)
          ++res.report.n_discarded;
        else
          ++res.report.n_augmented;
      }
      res.dataset.samples.push_back(std::move(s));
    }
  }
  if (res.report.n_anchors == 0)
    throw std::runtime_error("generate: no anchor converged");
  return res;
}

ProbeReport max_policy_error(const Dataset& ds, const ParametricNLP& nlp,
                             const SolverConfig& solver_cfg, int subsample, std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    if (!ds.samples[i].discarded && ds.samples[i].kind == PointKind::augmented)
      candidates.push_back(i);
  if (candidates.empty()) {
    // Anchor-only dataset: probe the anchors themselves.
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
      if (!ds.samples[i].discarded) candidates.push_back(i);
  }
  if (candidates.empty()) throw std::invalid_argument("max_policy_error: empty dataset");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picks;
  if (static_cast<int>(candidates.size()) <= subsample) {
    picks = candidates;
  } else {
    // Seeded Fisher-Yates prefix.
    std::vector<std::size_t> pool = candidates;
    for (int k = 0; k < subsample; ++k) {
      const std::size_t j =
          k + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size() - k));
      std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
      picks.push_back(pool[static_cast<std::size_t>(k)]);
    }
  }

  ProbeReport rep;
  const auto t0 = Clock::now();
  for (std::size_t idx : picks) {
    const Sample& s = ds.samples[idx];
    SolveResult sol = solve(nlp, s.p, std::nullopt, solver_cfg);
    if (!sol.converged()) {
      ++rep.failures;
      continue;
    }
    ++rep.probes;
    rep.max_error = std::max(rep.max_error, (s.u - nlp.action(sol.point.w)).norm());
  }
  rep.t_resolve_s = seconds_since(t0);
  return rep;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  q += '"';
  return q;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

void write_dataset_csv(const Dataset& ds, std::ostream& os) {
  for (int d = 0; d < ds.n_p; ++d) os << "p_" << d << ",";
  for (int d = 0; d < ds.n_u; ++d) os << "u_" << d << ",";
  os << "kind,anchor_id,stationarity_norm,corrector_iters,discarded,reason\n";
  for (const auto& s : ds.samples) {
    for (int d = 0; d < ds.n_p; ++d) os << fmt17(s.p[d]) << ",";
    for (int d = 0; d < ds.n_u; ++d) os << fmt17(s.u[d]) << ",";
    os << (s.kind == PointKind::exact_anchor ? "exact_anchor" : "augmented") << ","
       << s.anchor_id << "," << fmt17(s.stationarity_norm) << "," << s.corrector_iters << ","
       << (s.discarded ? 1 : 0) << "," << csv_quote(s.reason) << "\n";
  }
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset_csv(ds, os);
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset CSV: empty file");
  const auto header = split_csv_line(line);
  Dataset ds;
  for (const auto& h : header) {
    if (h.rfind("p_", 0) == 0) ++ds.n_p;
    if (h.rfind("u_", 0) == 0) ++ds.n_u;
  }
  const std::size_t expected = static_cast<std::size_t>(ds.n_p + ds.n_u) + 6;
  if (ds.n_p == 0 || header.size() != expected)
    throw std::runtime_error("dataset CSV: unrecognized header");
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != expected)
      throw std::runtime_error("dataset CSV: bad field count at row " + std::to_string(row));
    Sample s;
    try {
      s.p.resize(ds.n_p);
      for (int d = 0; d < ds.n_p; ++d) s.p[d] = std::stod(f[static_cast<std::size_t>(d)]);
      s.u.resize(ds.n_u);
      for (int d = 0; d < ds.n_u; ++d)
        s.u[d] = std::stod(f[static_cast<std::size_t>(ds.n_p + d)]);
      std::size_t k = static_cast<std::size_t>(ds.n_p + ds.n_u);
      s.kind = f[k] == "exact_anchor" ? PointKind::exact_anchor : PointKind::augmented;
      s.anchor_id = std::stoi(f[k + 1]);
      s.stationarity_norm = std::stod(f[k + 2]);
      s.corrector_iters = std::stoi(f[k + 3]);
      s.discarded = f[k + 4] == "1";
      s.reason = f[k + 5];
    } catch (const std::exception&) {
      throw std::runtime_error("dataset CSV: parse error at row " + std::to_string(row));
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(is);
}

}  // namespace sensaug
