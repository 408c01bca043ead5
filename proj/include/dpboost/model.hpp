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

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dpboost/data.hpp"
#include "dpboost/error.hpp"
#include "json.hpp"

namespace dpboost {

// Every sign in the library maps a score of exactly 0 to +1.
inline double sign_label(double score) { return score >= 0.0 ? 1.0 : -1.0; }

// sign(coeffs . x[cols] + intercept) over a column subset.
struct LinearClassifier {
  Eigen::VectorXd coeffs;
  double intercept = 0.0;
  IndexSet cols;

  void validate(Eigen::Index d) const {
    if (cols.empty()) throw Error("classifier: empty column set");
    if (static_cast<std::size_t>(coeffs.size()) != cols.size()) {
      throw Error("classifier: coefficient count does not match columns");
    }
    for (Eigen::Index j : cols) {
      if (j < 0 || j >= d) throw Error("classifier: column out of range");
    }
    if (!coeffs.allFinite() || !std::isfinite(intercept)) {
      throw Error("classifier: non-finite coefficient");
    }
  }

  template <typename Row>
  double score(const Row& x) const {
    double s = intercept;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      s += coeffs[static_cast<Eigen::Index>(k)] * x[cols[k]];
    }
    return s;
  }

  template <typename Row>
  double predict(const Row& x) const {
    return sign_label(score(x));
  }

  // Scores for every row of X.
  Eigen::VectorXd scores(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd s = Eigen::VectorXd::Constant(X.rows(), intercept);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      s.noalias() += coeffs[static_cast<Eigen::Index>(k)] * X.col(cols[k]);
    }
    return s;
  }

  Eigen::VectorXd predict_all(const Eigen::MatrixXd& X) const {
    return scores(X).unaryExpr([](double v) { return sign_label(v); });
  }

  bool operator==(const LinearClassifier&) const = default;
};

inline double predict_linear(const LinearClassifier& clf,
                             std::span<const double> x) {
  for (Eigen::Index j : clf.cols) {
    if (j < 0 || static_cast<std::size_t>(j) >= x.size()) {
      throw Error("predict_linear: row too short for classifier columns");
    }
  }
  return clf.predict(x);
}

enum class Subspace { kPublic, kPrivate, kAll };

inline std::string_view to_string(Subspace s) {
  switch (s) {
    case Subspace::kPublic: return "public";
    case Subspace::kPrivate: return "private";
    default: return "all";
  }
}

inline Subspace parse_subspace(std::string_view s) {
  if (s == "public") return Subspace::kPublic;
  if (s == "private") return Subspace::kPrivate;
  if (s == "all") return Subspace::kAll;
  throw Error("unknown subspace '" + std::string(s) + "'");
}

struct EnsembleMember {
  double alpha = 0.0;
  LinearClassifier clf;
  Subspace subspace = Subspace::kAll;

  bool operator==(const EnsembleMember&) const = default;
};

// H(x) = sign(sum_t alpha_t h_t(x)).
struct Ensemble {
  std::vector<EnsembleMember> members;

  template <typename Row>
  double predict(const Row& x) const {
    if (members.empty()) throw Error("ensemble: no members");
    double s = 0.0;
    for (const auto& m : members) s += m.alpha * m.clf.predict(x);
    return sign_label(s);
  }

  Eigen::VectorXd predict_all(const Eigen::MatrixXd& X) const {
    return predict_prefix(X, members.size());
  }

  // Predictions of the partial ensemble H_t made of the first t members.
  Eigen::VectorXd predict_prefix(const Eigen::MatrixXd& X, std::size_t t) const {
    if (members.empty() || t == 0 || t > members.size()) {
      throw Error("ensemble: invalid prefix length");
    }
    Eigen::VectorXd s = Eigen::VectorXd::Zero(X.rows());
    for (std::size_t k = 0; k < t; ++k) {
      s.noalias() += members[k].alpha * members[k].clf.predict_all(X);
    }
    return s.unaryExpr([](double v) { return sign_label(v); });
  }

  bool operator==(const Ensemble&) const = default;
};

inline double ensemble_predict(const Ensemble& e, std::span<const double> x) {
  return e.predict(x);
}

// Fraction of rows where `predict(row)` equals the label.
template <typename Predict>
double accuracy(Predict&& predict, const Dataset& ds) {
  if (ds.n() == 0) throw Error("accuracy: empty dataset");
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const Eigen::RowVectorXd row = ds.X.row(i);
    if (predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))) == ds.y[i]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(ds.n());
}

inline double accuracy_of(const Eigen::VectorXd& predictions, const Eigen::VectorXd& y) {
  if (y.size() == 0) throw Error("accuracy: empty dataset");
  if (predictions.size() != y.size()) throw Error("accuracy: length mismatch");
  return static_cast<double>((predictions.array() == y.array()).count()) /
         static_cast<double>(y.size());
}

// Serialized form: {members:[{alpha, cols, coeffs, intercept, subspace}]}.
// nlohmann::json prints doubles with round-trip precision.
inline nlohmann::json to_json(const LinearClassifier& c) {
  return {{"cols", c.cols},
          {"coeffs", std::vector<double>(c.coeffs.data(), c.coeffs.data() + c.coeffs.size())},
          {"intercept", c.intercept}};
}

inline LinearClassifier classifier_from_json(const nlohmann::json& j) {
  LinearClassifier c;
  c.cols = j.at("cols").get<IndexSet>();
  const auto coeffs = j.at("coeffs").get<std::vector<double>>();
  c.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  c.intercept = j.at("intercept").get<double>();
  return c;
}

inline nlohmann::json to_json(const Ensemble& e) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : e.members) {
    nlohmann::json j = to_json(m.clf);
    j["alpha"] = m.alpha;
    j["subspace"] = std::string(to_string(m.subspace));
    members.push_back(std::move(j));
  }
  return {{"members", std::move(members)}};
}

inline Ensemble ensemble_from_json(const nlohmann::json& j) {
  Ensemble e;
  try {
    for (const auto& m : j.at("members")) {
      e.members.push_back({m.at("alpha").get<double>(), classifier_from_json(m),
                           parse_subspace(m.at("subspace").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("ensemble json: ") + ex.what());
  }
  return e;
}

}  // namespace dpboost
