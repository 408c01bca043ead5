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

// Boosting with random classifiers.
//
// Each round of brc_fit trains a public classifier on the public columns
// with the public weights, draws a random linear classifier over the
// private columns, and keeps whichever has weighted error farther from 1/2.
// The private error is released through the Laplace mechanism with scale
// c1 c2 T / (epsilon n); private weights are confined to [1/c1, c2] so
// that one row can move that error by at most c1 c2 / n. The chosen
// classifier enters the ensemble with alpha = 1/2 - err.
//
// brc_fit_all_private is the variant with no public side: a single weight
// vector, random classifiers over every column, and the same noisy error.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpboost/data.hpp"
#include "dpboost/error.hpp"
#include "dpboost/logreg.hpp"
#include "dpboost/model.hpp"
#include "dpboost/noise.hpp"
#include "dpboost/rng.hpp"
#include "json.hpp"

namespace dpboost {

template <typename L>
concept PublicLearner = requires(const L& learner, const Dataset& ds,
                                 const IndexSet& cols, std::span<const double> w) {
  { learner(ds, cols, w) } -> std::convertible_to<LinearClassifier>;
};

template <typename S>
concept PrivateSampler = requires(S& sampler, SeededRng& rng) {
  { sampler(rng) } -> std::convertible_to<LinearClassifier>;
};

// 1 where the classifier disagrees with the label.
inline std::vector<char> misclassified(const LinearClassifier& clf, const Dataset& ds) {
  clf.validate(ds.d());
  const Eigen::VectorXd pred = clf.predict_all(ds.X);
  std::vector<char> miss(static_cast<std::size_t>(ds.n()));
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    miss[static_cast<std::size_t>(i)] = pred[i] != ds.y[i];
  }
  return miss;
}

inline double weighted_error(std::span<const char> miss, std::span<const double> weights) {
  if (miss.size() != weights.size()) throw Error("weighted error: length mismatch");
  double bad = 0.0, total = 0.0;
  for (std::size_t i = 0; i < miss.size(); ++i) {
    if (!(weights[i] > 0.0)) throw Error("weighted error: weights must be positive");
    total += weights[i];
    if (miss[i]) bad += weights[i];
  }
  if (!(total > 0.0)) throw Error("weighted error: zero total weight");
  return bad / total;
}

// sum_i w_i 1(y_i != clf(x_i)) / sum_i w_i
inline double weighted_error(const LinearClassifier& clf, const Dataset& ds,
                             std::span<const double> weights) {
  if (weights.size() != static_cast<std::size_t>(ds.n())) {
    throw Error("weighted error: length mismatch");
  }
  const auto miss = misclassified(clf, ds);
  return weighted_error(miss, weights);
}

inline void check_clip_bounds(std::span<const double> w, double c1, double c2) {
  const double lo = 1.0 / c1;
  for (double v : w) {
    if (!(v >= lo && v <= c2)) throw Error("private weight outside [1/c1, c2]");
  }
}

// Weighted error of `clf` released with one Laplace(p.laplace_scale()) draw.
// The value may fall outside [0, 1].
inline double noisy_private_error(const LinearClassifier& clf, const Dataset& ds,
                                  std::span<const double> w_pri,
                                  const PrivacyParams& p, SeededRng& rng) {
  p.validate();
  check_clip_bounds(w_pri, p.c1, p.c2);
  return weighted_error(clf, ds, w_pri) + laplace(p.laplace_scale(), rng);
}

// Multiplies w by exp(alpha) when misclassified, unless the product would
// leave [1/c1, c2]; then w is left unchanged (skipped, not clamped).
inline double clipped_update(double w, double alpha, bool misclassified,
                             double c1, double c2) {
  const double candidate = w * std::exp(alpha * (misclassified ? 1.0 : 0.0));
  if (candidate <= c2 && candidate >= 1.0 / c1) return candidate;
  return w;
}

struct BoostState {
  std::vector<double> w_pub;
  std::vector<double> w_pri;
  int round = 0;
};

struct RoundRecord {
  int t = 0;
  Subspace chosen = Subspace::kPrivate;
  double err_pub = std::numeric_limits<double>::quiet_NaN();  // NaN without a public side
  double err_pri_noisy = 0.0;
  double alpha = 0.0;
};

inline nlohmann::json to_json(const RoundRecord& r) {
  nlohmann::json j;
  j["t"] = r.t;
  j["chosen"] = std::string(to_string(r.chosen));
  j["err_pub"] = std::isnan(r.err_pub) ? nlohmann::json(nullptr) : nlohmann::json(r.err_pub);
  j["err_pri_noisy"] = r.err_pri_noisy;
  j["alpha"] = r.alpha;
  return j;
}

struct FitResult {
  Ensemble ensemble;
  std::vector<RoundRecord> rounds;
  std::vector<double> laplace_scales;  // one entry per Laplace draw
};

struct BoostStreams {
  SeededRng& classifiers;
  SeededRng& laplace;
};

struct BoostOptions {
  // Replaces c1 c2 T / (epsilon n). Zero disables the noise entirely; this
  // is for noise-free comparisons and gives no privacy.
  std::optional<double> laplace_scale_override;
  // When false the public classifier is never fit and every round takes
  // the private branch.
  bool public_branch = true;
  // Called after every round with the post-update state.
  std::function<void(const BoostState&, const RoundRecord&)> on_round;
};

namespace detail {

inline double release_error(double exact, const PrivacyParams& p,
                            const BoostOptions& opts, SeededRng& rng,
                            std::vector<double>& scales) {
  const double scale = opts.laplace_scale_override.value_or(p.laplace_scale());
  if (scale == 0.0) return exact;
  scales.push_back(scale);
  return exact + laplace(scale, rng);
}

inline void check_fit_params(const Dataset& train, const PrivacyParams& p) {
  p.validate();
  if (p.n != train.n()) throw Error("privacy params: n must equal the training size");
  train.check_invariants();
}

}  // namespace detail

template <PublicLearner Learner = LogRegLearner,
          PrivateSampler Sampler = RandomLinearSampler>
FitResult brc_fit(const Dataset& train, const FeatureSplit& split,
                  const PrivacyParams& p, const Learner& learner,
                  BoostStreams streams, Sampler sampler,
                  const BoostOptions& opts = {}) {
  detail::check_fit_params(train, p);
  split.validate(train.d(), /*require_private=*/true);
  const bool use_public = opts.public_branch && !split.public_cols.empty();
  const Subspace private_tag =
      split.public_cols.empty() ? Subspace::kAll : Subspace::kPrivate;
  const auto n = static_cast<std::size_t>(train.n());

  BoostState state;
  state.w_pub.assign(n, 1.0);
  state.w_pri.assign(n, 1.0);
  FitResult out;

  for (int t = 1; t <= p.rounds; ++t) {
    state.round = t;
    RoundRecord rec;
    rec.t = t;

    LinearClassifier h_pub;
    std::vector<char> miss_pub;
    if (use_public) {
      h_pub = learner(train, split.public_cols, state.w_pub);
      miss_pub = misclassified(h_pub, train);
      rec.err_pub = weighted_error(miss_pub, state.w_pub);
    }

    LinearClassifier h_pri = sampler(streams.classifiers);
    const auto miss_pri = misclassified(h_pri, train);
    rec.err_pri_noisy = detail::release_error(weighted_error(miss_pri, state.w_pri),
                                              p, opts, streams.laplace,
                                              out.laplace_scales);

    if (use_public &&
        std::abs(0.5 - rec.err_pub) > std::abs(0.5 - rec.err_pri_noisy)) {
      rec.chosen = Subspace::kPublic;
      rec.alpha = 0.5 - rec.err_pub;
      for (std::size_t i = 0; i < n; ++i) {
        if (miss_pub[i]) state.w_pub[i] *= std::exp(rec.alpha);
      }
      out.ensemble.members.push_back({rec.alpha, std::move(h_pub), Subspace::kPublic});
    } else {
      rec.chosen = Subspace::kPrivate;
      rec.alpha = 0.5 - rec.err_pri_noisy;
      for (std::size_t i = 0; i < n; ++i) {
        state.w_pri[i] = clipped_update(state.w_pri[i], rec.alpha, miss_pri[i], p.c1, p.c2);
      }
      out.ensemble.members.push_back({rec.alpha, std::move(h_pri), private_tag});
    }
    out.rounds.push_back(rec);
    if (opts.on_round) opts.on_round(state, rec);
  }
  return out;
}

template <PublicLearner Learner = LogRegLearner>
FitResult brc_fit(const Dataset& train, const FeatureSplit& split,
                  const PrivacyParams& p, const Learner& learner,
                  BoostStreams streams, const BoostOptions& opts = {}) {
  return brc_fit(train, split, p, learner, streams,
                 RandomLinearSampler{split.private_cols}, opts);
}

// All columns private: one weight vector, no public branch. The state's
// w_pub stays empty.
template <PrivateSampler Sampler>
FitResult brc_fit_all_private(const Dataset& train, const PrivacyParams& p,
                              BoostStreams streams, Sampler sampler,
                              const BoostOptions& opts = {}) {
  detail::check_fit_params(train, p);
  const auto n = static_cast<std::size_t>(train.n());
  BoostState state;
  state.w_pri.assign(n, 1.0);
  FitResult out;
  for (int t = 1; t <= p.rounds; ++t) {
    state.round = t;
    LinearClassifier h = sampler(streams.classifiers);
    const auto miss = misclassified(h, train);
    RoundRecord rec;
    rec.t = t;
    rec.chosen = Subspace::kAll;
    rec.err_pri_noisy = detail::release_error(weighted_error(miss, state.w_pri), p,
                                              opts, streams.laplace, out.laplace_scales);
    rec.alpha = 0.5 - rec.err_pri_noisy;
    for (std::size_t i = 0; i < n; ++i) {
      state.w_pri[i] = clipped_update(state.w_pri[i], rec.alpha, miss[i], p.c1, p.c2);
    }
    out.ensemble.members.push_back({rec.alpha, std::move(h), Subspace::kAll});
    out.rounds.push_back(rec);
    if (opts.on_round) opts.on_round(state, rec);
  }
  return out;
}

inline FitResult brc_fit_all_private(const Dataset& train, const PrivacyParams& p,
                                     BoostStreams streams, const BoostOptions& opts = {}) {
  return brc_fit_all_private(train, p, streams, RandomLinearSampler{train.all_columns()},
                             opts);
}

enum class AlphaRule {
  kLogOdds,  // log((1 - err) / err), classic AdaBoost
  kLinear,   // 1/2 - err
};

struct AdaBoostOptions {
  AlphaRule alpha_rule = AlphaRule::kLogOdds;
  // Optional [1/c1, c2] skip-clipping of the weights.
  std::optional<std::pair<double, double>> clip;
};

// Non-private AdaBoost over a single weight vector with a caller-supplied
// weak learner. With random classifiers as the weak learner this is the
// convergence reference for the private loops.
template <typename WeakLearner>
  requires std::invocable<WeakLearner&, std::span<const double>>
FitResult adaboost(const Dataset& train, int rounds, WeakLearner&& weak,
                   const AdaBoostOptions& opts = {}) {
  if (rounds < 1) throw Error("adaboost: rounds must be >= 1");
  const auto n = static_cast<std::size_t>(train.n());
  std::vector<double> w(n, 1.0);
  FitResult out;
  for (int t = 1; t <= rounds; ++t) {
    LinearClassifier h = weak(std::span<const double>(w));
    const auto miss = misclassified(h, train);
    const double err = weighted_error(miss, w);
    double alpha = 0.5 - err;
    if (opts.alpha_rule == AlphaRule::kLogOdds) {
      const double e = std::clamp(err, 1e-12, 1.0 - 1e-12);
      alpha = std::log((1.0 - e) / e);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (opts.clip) {
        w[i] = clipped_update(w[i], alpha, miss[i], opts.clip->first, opts.clip->second);
      } else if (miss[i]) {
        w[i] *= std::exp(alpha);
      }
    }
    out.ensemble.members.push_back({alpha, std::move(h), Subspace::kAll});
    out.rounds.push_back({t, Subspace::kAll, std::numeric_limits<double>::quiet_NaN(), err, alpha});
  }
  return out;
}

// --- Sensitivity oracle -----------------------------------------------------

// Candidate weights for a replaced row: {1/c1, 1, c2} and five evenly spaced
// interior points of [1/c1, c2].
inline std::vector<double> replacement_weight_grid(double c1, double c2) {
  const double lo = 1.0 / c1;
  std::vector<double> grid{lo, 1.0, c2};
  for (int k = 1; k <= 5; ++k) grid.push_back(lo + (c2 - lo) * k / 6.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

inline std::vector<double> default_value_grid() { return {-1.0, -0.5, 0.0, 0.5, 1.0}; }

constexpr Eigen::Index kOracleMaxRows = 8;
constexpr std::size_t kOracleMaxPrivateDims = 2;

// Brute-force max |g(D) - g(D')| over every neighbor D' that replaces one
// row's values in clf.cols by a point of `value_grid`^k and that row's
// weight by a point of replacement_weight_grid(c1, c2), for each admissible
// weight vector in `weight_vectors`. g is the weighted error.
inline double sensitivity_oracle(const LinearClassifier& clf, const Dataset& D,
                                 const std::vector<std::vector<double>>& weight_vectors,
                                 double c1, double c2,
                                 const std::vector<double>& value_grid = default_value_grid()) {
  if (D.n() > kOracleMaxRows || clf.cols.size() > kOracleMaxPrivateDims) {
    throw Error("sensitivity oracle: instance too large for enumeration");
  }
  if (value_grid.empty()) throw Error("sensitivity oracle: empty value grid");
  clf.validate(D.d());
  const auto n = static_cast<std::size_t>(D.n());
  const std::vector<double> w_grid = replacement_weight_grid(c1, c2);
  const auto base_miss = misclassified(clf, D);
  const std::size_t k = clf.cols.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < k; ++i) combos *= value_grid.size();

  double best = 0.0;
  Eigen::VectorXd row(D.d());
  for (const auto& w : weight_vectors) {
    if (w.size() != n) throw Error("sensitivity oracle: weight vector length mismatch");
    check_clip_bounds(w, c1, c2);
    const double g = weighted_error(base_miss, w);
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      for (std::size_t combo = 0; combo < combos; ++combo) {
        row = D.X.row(jj).transpose();
        std::size_t code = combo;
        for (std::size_t c = 0; c < k; ++c) {
          row[clf.cols[c]] = value_grid[code % value_grid.size()];
          code /= value_grid.size();
        }
        const bool miss_new = clf.predict(row) != D.y[jj];
        for (double w_new : w_grid) {
          double bad = 0.0, total = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double wi = i == j ? w_new : w[i];
            const bool mi = i == j ? miss_new : base_miss[i] != 0;
            total += wi;
            if (mi) bad += wi;
          }
          best = std::max(best, std::abs(g - bad / total));
        }
      }
    }
  }
  return best;
}


struct SensitivityGridReport {
  std::size_t instances = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;        // max oracle / (c1 c2 / n)
  double max_excess = -1.0;      // max oracle - c1 c2 / n
};

// Lemma-style sweep over n in {2..6}, 1-2 private columns on the default
// value grid and c1 = c2 in {1, sqrt 2, 2}. Each cell draws
// `instances_per_cell` datasets, labels and classifiers from `seed`, and
// evaluates every weight vector with entries in {1/c1, c2} plus all ones.
inline SensitivityGridReport run_sensitivity_grid(std::uint64_t seed,
                                                  int instances_per_cell = 20) {
  SensitivityGridReport rep;
  const auto values = default_value_grid();
  std::uint64_t cell = 0;
  for (Eigen::Index n = 2; n <= 6; ++n) {
    for (Eigen::Index k = 1; k <= 2; ++k) {
      for (double c : {1.0, std::sqrt(2.0), 2.0}) {
        SeededRng rng(seed, cell++);
        std::vector<std::vector<double>> weights;
        const auto un = static_cast<std::size_t>(n);
        for (std::size_t mask = 0; mask < (std::size_t{1} << un); ++mask) {
          std::vector<double> w(un);
          for (std::size_t i = 0; i < un; ++i) w[i] = (mask >> i) & 1 ? c : 1.0 / c;
          weights.push_back(std::move(w));
        }
        weights.emplace_back(un, 1.0);
        for (int inst = 0; inst < instances_per_cell; ++inst) {
          Dataset D;
          D.X.resize(n, k);
          D.y.resize(n);
          for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
              D.X(i, j) = values[rng.uniform_index(values.size())];
            }
            D.y[i] = rng.bernoulli(0.5) ? 1.0 : -1.0;
          }
          for (Eigen::Index j = 0; j < k; ++j) {
            D.columns.push_back({"x" + std::to_string(j), ColumnKind::kNumeric, "", 0});
          }
          D.normalized = true;
          const LinearClassifier clf = random_linear_classifier(D.all_columns(), rng);
          const double bound = c * c / static_cast<double>(n);
          const double v = sensitivity_oracle(clf, D, weights, c, c, values);
          ++rep.instances;
          if (v > bound + 1e-12) ++rep.violations;
          rep.max_ratio = std::max(rep.max_ratio, v / bound);
          rep.max_excess = std::max(rep.max_excess, v - bound);
        }
      }
    }
  }
  return rep;
}

}  // namespace dpboost
