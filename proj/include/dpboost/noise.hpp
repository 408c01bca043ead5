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

// Laplace sampling, random linear classifiers and per-round budget
// bookkeeping. Only pure epsilon-DP with basic composition is supported.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dpboost/error.hpp"
#include "dpboost/model.hpp"
#include "dpboost/rng.hpp"

namespace dpboost {

struct PrivacyParams {
  double epsilon = 1.0;
  int rounds = 1;  // T
  double c1 = 1.0;
  double c2 = 1.0;
  Eigen::Index n = 1;

  void validate() const {
    if (!(epsilon > 0.0)) throw Error("privacy: epsilon must be positive");
    if (rounds < 1) throw Error("privacy: T must be at least 1");
    if (!(c1 >= 1.0) || !(c2 >= 1.0)) throw Error("privacy: c1, c2 must be >= 1");
    if (n < 1) throw Error("privacy: n must be at least 1");
  }

  // c1 c2 T / (epsilon n): the Laplace scale for one noisy private error.
  double laplace_scale() const {
    return c1 * c2 * static_cast<double>(rounds) /
           (epsilon * static_cast<double>(n));
  }

  // Sensitivity bound on the weighted error of a fixed classifier.
  double error_sensitivity() const { return c1 * c2 / static_cast<double>(n); }

  double lower_weight() const { return 1.0 / c1; }
  double upper_weight() const { return c2; }
};

// Each noisy error uses epsilon / T; T of them compose to epsilon.
inline double budget_per_round(const PrivacyParams& p) {
  p.validate();
  return p.epsilon / static_cast<double>(p.rounds);
}

// Inverse CDF of the unit Laplace at u in (-1/2, 1/2).
inline double unit_laplace_from_uniform(double u) {
  const double s = u < 0.0 ? -1.0 : (u > 0.0 ? 1.0 : 0.0);
  return -s * std::log(1.0 - 2.0 * std::abs(u));
}

// One draw from density exp(-|y|/b) / 2b. Consumes one word of `rng`.
// FIXME: floating-point Laplace samplers admit snapping-style attacks; a
// discretized sampler would be needed for deployment.
inline double laplace(double scale, SeededRng& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error("laplace: scale must be positive and finite");
  }
  const double u = rng.uniform01_open() - 0.5;
  return scale * unit_laplace_from_uniform(u);
}

// Coefficients (in column order) then the intercept, all uniform on [-1, 1).
inline LinearClassifier random_linear_classifier(const IndexSet& cols,
                                                 SeededRng& rng) {
  if (cols.empty()) throw Error("random classifier: empty column set");
  LinearClassifier c;
  c.cols = cols;
  c.coeffs.resize(static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index k = 0; k < c.coeffs.size(); ++k) {
    c.coeffs[k] = rng.uniform(-1.0, 1.0);
  }
  c.intercept = rng.uniform(-1.0, 1.0);
  return c;
}

// Sampler adaptor for the boosting loops.
struct RandomLinearSampler {
  IndexSet cols;
  LinearClassifier operator()(SeededRng& rng) const {
    return random_linear_classifier(cols, rng);
  }
};

}  // namespace dpboost
