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

#include <gtest/gtest.h>

#include <vector>

#include "dpboost/model.hpp"
#include "dpboost/rng.hpp"

namespace dpboost {
namespace {

LinearClassifier line(double coeff, double intercept, IndexSet cols = {0}) {
  LinearClassifier c;
  c.coeffs = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cols.size()), coeff);
  c.intercept = intercept;
  c.cols = std::move(cols);
  return c;
}

// +1 on x[0] >= 0, -1 otherwise.
LinearClassifier positive_side() { return line(1.0, 0.0); }
LinearClassifier negative_side() { return line(-1.0, -1e-9); }

Dataset points(std::vector<double> xs, std::vector<double> ys) {
  Dataset ds;
  ds.X = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  ds.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  ds.columns.push_back({"x", ColumnKind::kNumeric, "", 0});
  return ds;
}

TEST(PredictLinear, PositiveDot) {
  const std::vector<double> x{0.5};
  EXPECT_EQ(predict_linear(line(1, 0), x), 1.0);
}

TEST(PredictLinear, NegativeDot) {
  const std::vector<double> x{-0.5};
  EXPECT_EQ(predict_linear(line(1, 0), x), -1.0);
}

TEST(PredictLinear, ZeroScoreIsPositive) {
  const std::vector<double> x{0.5};
  EXPECT_EQ(predict_linear(line(1, -0.5), x), 1.0);
}

TEST(PredictLinear, RowTooShort) {
  const std::vector<double> x{0.5};
  EXPECT_THROW(predict_linear(line(1, 0, {3}), x), Error);
}

TEST(PredictLinear, IgnoresColumnsOutsideCols) {
  SeededRng rng(11, 0);
  LinearClassifier c;
  c.cols = {1, 3};
  c.coeffs = Eigen::Vector2d(0.7, -0.4);
  c.intercept = 0.1;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.uniform(-1, 1);
    const double before = predict_linear(c, x);
    x[0] = rng.uniform(-1, 1);
    x[2] = rng.uniform(-1, 1);
    x[4] = rng.uniform(-1, 1);
    EXPECT_EQ(predict_linear(c, x), before);
  }
}

TEST(LinearClassifier, ValidateCatchesBadShapes) {
  EXPECT_THROW(line(1, 0, {}).validate(1), Error);
  EXPECT_THROW(line(1, 0, {2}).validate(2), Error);
  auto c = line(1, 0);
  c.intercept = std::numeric_limits<double>::infinity();
  EXPECT_THROW(c.validate(1), Error);
  EXPECT_NO_THROW(line(1, 0).validate(1));
}

TEST(EnsemblePredict, SingleMemberMatchesMember) {
  Ensemble e{{{1.0, positive_side(), Subspace::kAll}}};
  for (double v : {-0.9, -0.1, 0.0, 0.3}) {
    const std::vector<double> x{v};
    EXPECT_EQ(ensemble_predict(e, x), predict_linear(positive_side(), x));
  }
}

TEST(EnsemblePredict, TieGoesPositive) {
  Ensemble e{{{0.3, positive_side(), Subspace::kAll}, {0.3, negative_side(), Subspace::kAll}}};
  const std::vector<double> x{0.5};  // votes +1, -1
  EXPECT_EQ(ensemble_predict(e, x), 1.0);
}

TEST(EnsemblePredict, WeightedSum) {
  Ensemble e{{{0.1, positive_side(), Subspace::kAll}, {0.4, negative_side(), Subspace::kAll}}};
  const std::vector<double> x{0.5};
  EXPECT_EQ(ensemble_predict(e, x), -1.0);
}

TEST(EnsemblePredict, EmptyEnsemble) {
  const std::vector<double> x{0.5};
  EXPECT_THROW(ensemble_predict(Ensemble{}, x), Error);
}

TEST(EnsemblePredict, AlphaScalingInvariance) {
  SeededRng rng(5, 0);
  Ensemble e;
  for (int t = 0; t < 7; ++t) {
    e.members.push_back({rng.uniform(-1, 1), line(rng.uniform(-1, 1), rng.uniform(-1, 1)), Subspace::kAll});
  }
  Eigen::MatrixXd X(300, 1);
  for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, 0) = rng.uniform(-1, 1);
  for (double lambda : {1e-3, 0.5, 2.0, 1e4}) {
    Ensemble scaled = e;
    for (auto& m : scaled.members) m.alpha *= lambda;
    EXPECT_EQ(scaled.predict_all(X), e.predict_all(X)) << lambda;
  }
}

TEST(EnsemblePredict, PrefixMatchesTruncation) {
  Ensemble e{{{0.5, positive_side(), Subspace::kPublic},
              {0.9, negative_side(), Subspace::kPrivate},
              {0.2, line(1, 0.5), Subspace::kAll}}};
  Eigen::MatrixXd X(3, 1);
  X << -0.7, 0.2, 0.9;
  for (std::size_t t = 1; t <= 3; ++t) {
    Ensemble head{{e.members.begin(), e.members.begin() + static_cast<std::ptrdiff_t>(t)}};
    EXPECT_EQ(e.predict_prefix(X, t), head.predict_all(X));
  }
  EXPECT_THROW(e.predict_prefix(X, 0), Error);
  EXPECT_THROW(e.predict_prefix(X, 4), Error);
}

TEST(Accuracy, PerfectPredictor) {
  const auto ds = points({-0.5, 0.5, 0.9}, {-1, 1, 1});
  EXPECT_EQ(accuracy([&](std::span<const double> x) { return x[0] >= 0 ? 1.0 : -1.0; }, ds), 1.0);
}

TEST(Accuracy, ConstantOnBalanced) {
  const auto ds = points({-0.5, 0.5, -0.2, 0.1}, {-1, 1, -1, 1});
  EXPECT_EQ(accuracy([](std::span<const double>) { return 1.0; }, ds), 0.5);
}

TEST(Accuracy, TwoOfThree) {
  const auto ds = points({-0.5, 0.5, 0.9}, {-1, 1, -1});
  EXPECT_DOUBLE_EQ(accuracy([&](std::span<const double> x) { return x[0] >= 0 ? 1.0 : -1.0; }, ds),
                   2.0 / 3.0);
}

TEST(Accuracy, EmptyDataset) {
  Dataset ds;
  EXPECT_THROW(accuracy([](std::span<const double>) { return 1.0; }, ds), Error);
}

TEST(Accuracy, FlipComplement) {
  SeededRng rng(8, 0);
  std::vector<double> xs, ys;
  for (int i = 0; i < 101; ++i) {
    xs.push_back(rng.uniform(-1, 1));
    ys.push_back(rng.bernoulli(0.5) ? 1.0 : -1.0);
  }
  const auto ds = points(xs, ys);
  const auto clf = line(0.8, 0.1);  // no score is exactly 0 on these points
  const double a = accuracy([&](std::span<const double> x) { return clf.predict(x); }, ds);
  const double b = accuracy([&](std::span<const double> x) { return -clf.predict(x); }, ds);
  EXPECT_DOUBLE_EQ(a, 1.0 - b);
}

TEST(Serialization, RoundTripIsExact) {
  SeededRng rng(13, 0);
  Ensemble e;
  for (int t = 0; t < 5; ++t) {
    LinearClassifier c;
    c.cols = {0, 2, 5};
    c.coeffs = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    c.intercept = rng.uniform(-1, 1) / 3.0;
    e.members.push_back({rng.standard_normal(), c, t % 2 ? Subspace::kPublic : Subspace::kPrivate});
  }
  const std::string text = to_json(e).dump();
  const Ensemble back = ensemble_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, e);
  EXPECT_EQ(to_json(back).dump(), text);
  const auto j = to_json(e)["members"][0];
  for (const char* key : {"alpha", "cols", "coeffs", "intercept", "subspace"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Serialization, RejectsUnknownSubspace) {
  EXPECT_THROW(parse_subspace("hidden"), Error);
  EXPECT_EQ(parse_subspace("all"), Subspace::kAll);
}

}  // namespace
}  // namespace dpboost
