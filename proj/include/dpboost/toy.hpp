// Copyright 2026 The dpboost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// One-dimensional threshold toy: n points on a line, left half -1, right
// half +1. The private learner flips every label with probability p and
// returns the best unit-weight threshold on the flipped labels, which for p
// near 1/2 is close to a uniformly random threshold.

#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpboost/boosting.hpp"
#include "dpboost/data.hpp"
#include "dpboost/model.hpp"
#include "dpboost/noise.hpp"
#include "dpboost/rng.hpp"
#include "json.hpp"

namespace dpboost {

struct ToyConfig {
  Eigen::Index n = 2000;
  double p = 0.49;
  int T = 50;
  double c1 = 2.0;
  double c2 = 2.0;
  int repeats = 10;
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 2 || n % 2 != 0) throw Error("toy: n must be even and >= 2");
    if (!(p >= 0.0 && p < 0.5)) throw Error("toy: p must lie in [0, 0.5)");
    if (repeats < 1) throw Error("toy: repeats must be >= 1");
    PrivacyParams{1.0, T, c1, c2, n}.validate();
  }
};

// Classifies point index j < threshold as -1 and j >= threshold as +1.
struct ThresholdClassifier {
  Eigen::Index threshold = 0;

  // Equivalent linear classifier on the normalized coordinate
  // x_j = 2 j / (n - 1) - 1, cutting halfway between neighbours.
  LinearClassifier to_linear(Eigen::Index n) const {
    LinearClassifier c;
    c.cols = {0};
    c.coeffs = Eigen::VectorXd::Ones(1);
    c.intercept = -(2.0 * (static_cast<double>(threshold) - 0.5) /
                        static_cast<double>(n - 1) - 1.0);
    return c;
  }
};

inline Dataset generate_toy(Eigen::Index n) {
  if (n < 2 || n % 2 != 0) throw Error("toy: n must be even and >= 2");
  Dataset ds;
  ds.X.resize(n, 1);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.X(i, 0) = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
    ds.y[i] = i < n / 2 ? -1.0 : 1.0;
  }
  ds.columns.push_back({"x", ColumnKind::kNumeric, "", 0});
  ds.normalized = true;
  return ds;
}

// Best threshold for labels `y` (rows in increasing x order); ties go to the
// smallest index. O(n).
inline Eigen::Index best_threshold(const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  // correct(i) = #{j < i : y_j = -1} + #{j >= i : y_j = +1}
  Eigen::Index correct = (y.array() > 0.0).count();
  Eigen::Index best = correct, best_i = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    correct += y[i - 1] < 0.0 ? 1 : -1;
    if (correct > best) {
      best = correct;
      best_i = i;
    }
  }
  return best_i;
}

// Flips every label independently with probability p (one word per row) and
// fits the best unit-weight threshold. Rows must be sorted by x.
inline ThresholdClassifier flip_and_fit_threshold(const Dataset& ds, double p, SeededRng& rng) {
  if (!(p >= 0.0 && p < 0.5)) throw Error("toy: p must lie in [0, 0.5)");
  if (ds.d() != 1) throw Error("toy: dataset must be one-dimensional");
  Eigen::VectorXd flipped = ds.y;
  for (Eigen::Index i = 0; i < flipped.size(); ++i) {
    if (rng.bernoulli(p)) flipped[i] = -flipped[i];
  }
  return {best_threshold(flipped)};
}

// Private sampler for the boosting loop that also logs the threshold of
// every classifier it hands out.
struct FlipThresholdSampler {
  const Dataset* ds;
  double p;
  std::vector<Eigen::Index>* thresholds;

  LinearClassifier operator()(SeededRng& rng) const {
    const ThresholdClassifier h = flip_and_fit_threshold(*ds, p, rng);
    if (thresholds) thresholds->push_back(h.threshold);
    return h.to_linear(ds->n());
  }
};

struct ToyRun {
  double epsilon = 0.0;
  int repeat = 0;
  double accuracy = 0.0;
  std::vector<Eigen::Index> thresholds;  // per round
  std::vector<double> alphas;            // per round
};

struct ToyReport {
  ToyConfig config;
  std::vector<double> epsilons;
  std::vector<double> rule_of_thumb;  // c1 c2 T / (epsilon n), per epsilon
  std::vector<ToyRun> runs;           // epsilon-major, repeat-minor

  std::vector<double> accuracies(double epsilon) const {
    std::vector<double> out;
    for (const auto& r : runs) {
      if (r.epsilon == epsilon) out.push_back(r.accuracy);
    }
    return out;
  }

  // sum |alpha_t| i_t / sum |alpha_t| over every round of every repeat.
  double alpha_weighted_threshold(double epsilon) const {
    double num = 0.0, den = 0.0;
    for (const auto& r : runs) {
      if (r.epsilon != epsilon) continue;
      for (std::size_t t = 0; t < r.thresholds.size(); ++t) {
        num += std::abs(r.alphas[t]) * static_cast<double>(r.thresholds[t]);
        den += std::abs(r.alphas[t]);
      }
    }
    if (!(den > 0.0)) throw Error("toy: no rounds recorded for epsilon");
    return num / den;
  }
};

inline ToyRun run_toy_once(const Dataset& toy, const ToyConfig& cfg, double epsilon,
                           std::size_t eps_index, int repeat) {
  ToyRun run;
  run.epsilon = epsilon;
  run.repeat = repeat;
  const auto r = static_cast<std::uint64_t>(repeat);
  SeededRng clf_rng(cfg.seed, stream_id(eps_index + 1, r, Purpose::kPrivateClassifiers));
  SeededRng lap_rng(cfg.seed, stream_id(eps_index + 1, r, Purpose::kLaplace));
  const PrivacyParams p{epsilon, cfg.T, cfg.c1, cfg.c2, toy.n()};
  FitResult fit = brc_fit_all_private(toy, p, {clf_rng, lap_rng},
                                      FlipThresholdSampler{&toy, cfg.p, &run.thresholds});
  for (const auto& rec : fit.rounds) run.alphas.push_back(rec.alpha);
  run.accuracy = accuracy_of(fit.ensemble.predict_all(toy.X), toy.y);
  return run;
}

inline ToyReport run_toy_sweep(const ToyConfig& cfg, const std::vector<double>& eps_list) {
  cfg.validate();
  if (eps_list.empty()) throw Error("toy: empty epsilon list");
  const Dataset toy = generate_toy(cfg.n);
  ToyReport report;
  report.config = cfg;
  report.epsilons = eps_list;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    report.rule_of_thumb.push_back(PrivacyParams{eps_list[e], cfg.T, cfg.c1, cfg.c2, cfg.n}
                                       .laplace_scale());
    for (int r = 0; r < cfg.repeats; ++r) {
      report.runs.push_back(run_toy_once(toy, cfg, eps_list[e], e, r));
    }
  }
  return report;
}

inline void write_toy_csv(const ToyReport& report, std::ostream& out) {
  out << "epsilon,repeat,accuracy\n";
  for (const auto& r : report.runs) {
    out << nlohmann::json(r.epsilon).dump() << ',' << r.repeat << ','
        << nlohmann::json(r.accuracy).dump() << '\n';
  }
}

inline nlohmann::json toy_traces_json(const ToyReport& report) {
  nlohmann::json j;
  j["n"] = report.config.n;
  j["p"] = report.config.p;
  j["T"] = report.config.T;
  j["c1"] = report.config.c1;
  j["c2"] = report.config.c2;
  j["seed"] = report.config.seed;
  j["epsilons"] = report.epsilons;
  j["rule_of_thumb"] = report.rule_of_thumb;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) {
    runs.push_back({{"epsilon", r.epsilon},
                    {"repeat", r.repeat},
                    {"accuracy", r.accuracy},
                    {"thresholds", r.thresholds},
                    {"alphas", r.alphas}});
  }
  j["runs"] = std::move(runs);
  return j;
}

}  // namespace dpboost
