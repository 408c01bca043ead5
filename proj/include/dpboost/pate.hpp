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

// Teacher-ensemble baseline over a public/private column split. Teachers
// are logistic regressions on disjoint shards using private columns only;
// their noisy majority vote becomes an extra feature for a student trained
// on the public columns.
//
// Accounting: each queried row releases two vote counts, each of
// sensitivity 1, so one query costs 2 / scale. The whole budget is spread
// over T_q = (training rows + declared test queries) by basic composition,
// giving a per-count Laplace scale of 2 T_q / epsilon.

#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "dpboost/data.hpp"
#include "dpboost/error.hpp"
#include "dpboost/logreg.hpp"
#include "dpboost/model.hpp"
#include "dpboost/noise.hpp"
#include "dpboost/rng.hpp"

namespace dpboost {

struct PateConfig {
  int k_teachers = 25;
  // Prediction queries the model will answer; charged at fit time.
  Eigen::Index test_queries = 0;
  LogRegHyper teacher_hyper;
  LogRegHyper student_hyper;
  static constexpr Eigen::Index kMinShardRows = 10;
};

struct PateModel {
  std::vector<LinearClassifier> teachers;
  LinearClassifier student;  // reads public columns then the vote column
  IndexSet public_cols;
  double vote_scale = 0.0;
  Eigen::Index query_budget = 0;
  Eigen::VectorXd train_votes;  // the noisy votes released during fitting

  // +1 / -1 by noisy argmax over the two vote counts; ties go to +1.
  double noisy_vote(const Eigen::Ref<const Eigen::RowVectorXd>& x, SeededRng& rng) const {
    double pos = 0.0;
    for (const auto& t : teachers) pos += t.predict(x) > 0.0 ? 1.0 : 0.0;
    const double neg = static_cast<double>(teachers.size()) - pos;
    const double noisy_pos = pos + laplace(vote_scale, rng);
    const double noisy_neg = neg + laplace(vote_scale, rng);
    return noisy_pos >= noisy_neg ? 1.0 : -1.0;
  }

  // Public columns of X followed by the vote column.
  Eigen::MatrixXd student_features(const Eigen::MatrixXd& X, const Eigen::VectorXd& votes) const {
    Eigen::MatrixXd F(X.rows(), static_cast<Eigen::Index>(public_cols.size()) + 1);
    F.leftCols(static_cast<Eigen::Index>(public_cols.size())) = X(Eigen::all, public_cols);
    F.rightCols(1) = votes;
    return F;
  }

  // One noisy vote per row, drawn in row order.
  Eigen::VectorXd predict_all(const Eigen::MatrixXd& X, SeededRng& rng) const {
    Eigen::VectorXd votes(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) votes[i] = noisy_vote(X.row(i), rng);
    return student.predict_all(student_features(X, votes));
  }
};

inline PateModel fit_pate(const Dataset& train, const FeatureSplit& split,
                          double epsilon, const PateConfig& cfg, SeededRng& rng) {
  if (!(epsilon > 0.0)) throw Error("pate: epsilon must be positive");
  if (cfg.k_teachers < 2) throw Error("pate: need at least two teachers");
  if (cfg.test_queries < 0) throw Error("pate: negative query budget");
  split.validate(train.d(), /*require_private=*/true);
  const Eigen::Index n = train.n();
  if (n < static_cast<Eigen::Index>(cfg.k_teachers) * PateConfig::kMinShardRows) {
    throw Error("pate: shard too small to train (need >= 10 rows per teacher)");
  }

  PateModel model;
  model.public_cols = split.public_cols;
  model.query_budget = n + cfg.test_queries;
  model.vote_scale = 2.0 * static_cast<double>(model.query_budget) / epsilon;

  IndexSet order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  rng.shuffle(std::span<Eigen::Index>(order));
  const auto k = static_cast<std::size_t>(cfg.k_teachers);
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t lo = t * order.size() / k;
    const std::size_t hi = (t + 1) * order.size() / k;
    const Dataset shard = subset(train, std::span<const Eigen::Index>(order).subspan(lo, hi - lo));
    model.teachers.push_back(fit_logreg(shard, split.private_cols, cfg.teacher_hyper));
  }

  model.train_votes.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) model.train_votes[i] = model.noisy_vote(train.X.row(i), rng);

  Dataset student_ds;
  student_ds.X = model.student_features(train.X, model.train_votes);
  student_ds.y = train.y;
  student_ds.normalized = true;
  for (Eigen::Index j : split.public_cols) {
    student_ds.columns.push_back(train.columns[static_cast<std::size_t>(j)]);
  }
  student_ds.columns.push_back({"teacher_vote", ColumnKind::kNumeric, "", 0});
  model.student = fit_logreg(student_ds, student_ds.all_columns(), cfg.student_hyper);
  return model;
}

}  // namespace dpboost
