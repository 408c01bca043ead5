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

// Weighted L2-regularized logistic regression by full-batch gradient
// descent, and its objective-perturbation private variant.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dpboost/data.hpp"
#include "dpboost/error.hpp"
#include "dpboost/model.hpp"
#include "dpboost/rng.hpp"

namespace dpboost {

struct LogRegHyper {
  double lambda = 1e-3;
  int max_iters = 500;
  double step = 0.5;
  double tol = 1e-6;

  void validate() const {
    if (!(lambda >= 0.0)) throw Error("logreg: lambda must be >= 0");
    if (max_iters < 1) throw Error("logreg: max_iters must be >= 1");
    if (!(step > 0.0)) throw Error("logreg: step must be positive");
    if (!(tol > 0.0)) throw Error("logreg: tol must be positive");
  }
};

// log(1 + exp(-m)) without overflow.
inline double log1p_exp_neg(double m) {
  return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

// (1/sum w) sum_i w_i log(1 + exp(-y_i (theta . x_i + b)))
//   + (lambda/2) |theta|^2 + (linear . theta) / n.
// Parameters are packed as [theta; b]. With fit_intercept false the last
// slot is absent and X is expected to carry its own constant column.
class LogisticObjective {
 public:
  LogisticObjective(Eigen::MatrixXd X, Eigen::VectorXd y, Eigen::VectorXd w,
                    double lambda, bool fit_intercept = true)
      : X_(std::move(X)), y_(std::move(y)), lambda_(lambda),
        fit_intercept_(fit_intercept) {
    if (y_.size() != X_.rows() || w.size() != X_.rows()) {
      throw Error("logreg: weight/label length mismatch");
    }
    if (X_.rows() == 0) throw Error("logreg: empty dataset");
    if ((w.array() <= 0.0).any()) throw Error("logreg: weights must be positive");
    wn_ = w / w.sum();
  }

  Eigen::Index dim() const { return X_.cols() + (fit_intercept_ ? 1 : 0); }
  Eigen::Index features() const { return X_.cols(); }

  void set_linear_term(Eigen::VectorXd b) {
    if (b.size() != X_.cols()) throw Error("logreg: linear term size mismatch");
    linear_ = std::move(b);
  }

  double value(const Eigen::VectorXd& params) const {
    const Eigen::VectorXd m = margins(params);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) loss += wn_[i] * log1p_exp_neg(m[i]);
    const auto theta = params.head(X_.cols());
    loss += 0.5 * lambda_ * theta.squaredNorm();
    if (linear_.size() > 0) loss += linear_.dot(theta) / static_cast<double>(X_.rows());
    return loss;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const {
    const Eigen::VectorXd m = margins(params);
    // d/dm log(1+e^{-m}) = -1 / (1 + e^{m})
    Eigen::VectorXd s(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      s[i] = -wn_[i] * y_[i] / (1.0 + std::exp(m[i]));
    }
    Eigen::VectorXd g(dim());
    g.head(X_.cols()).noalias() = X_.transpose() * s;
    g.head(X_.cols()) += lambda_ * params.head(X_.cols());
    if (linear_.size() > 0) g.head(X_.cols()) += linear_ / static_cast<double>(X_.rows());
    if (fit_intercept_) g[X_.cols()] = s.sum();
    return g;
  }

 private:
  Eigen::VectorXd margins(const Eigen::VectorXd& params) const {
    if (params.size() != dim()) throw Error("logreg: parameter size mismatch");
    Eigen::VectorXd z = X_ * params.head(X_.cols());
    if (fit_intercept_) z.array() += params[X_.cols()];
    return y_.cwiseProduct(z);
  }

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Eigen::VectorXd wn_;
  Eigen::VectorXd linear_;
  double lambda_;
  bool fit_intercept_;
};

struct DescentTrace {
  std::vector<double> losses;  // loss after each accepted iteration
  int iterations = 0;
  bool converged = false;
};

// Full-batch gradient descent from zero. The step is halved whenever a
// trial step would raise the loss; after 20 consecutive halvings the run
// stops. Loss is therefore non-increasing.
inline Eigen::VectorXd minimize(const LogisticObjective& f, const LogRegHyper& h,
                                DescentTrace* trace = nullptr) {
  h.validate();
  Eigen::VectorXd params = Eigen::VectorXd::Zero(f.dim());
  double loss = f.value(params);
  double step = h.step;
  if (trace) trace->losses.push_back(loss);
  for (int it = 0; it < h.max_iters; ++it) {
    const Eigen::VectorXd g = f.gradient(params);
    if (g.norm() < h.tol) {
      if (trace) trace->converged = true;
      break;
    }
    bool accepted = false;
    for (int halvings = 0; halvings <= 20; ++halvings) {
      Eigen::VectorXd trial = params - step * g;
      const double trial_loss = f.value(trial);
      if (!std::isfinite(trial_loss)) throw Error("logreg: non-finite loss");
      if (trial_loss <= loss) {
        params = std::move(trial);
        loss = trial_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (trace) {
      trace->losses.push_back(loss);
      trace->iterations = it + 1;
    }
  }
  return params;
}

inline LinearClassifier fit_logreg_weighted(const Dataset& ds, const IndexSet& cols,
                                            std::span<const double> weights,
                                            const LogRegHyper& h = {}) {
  if (cols.empty()) throw Error("logreg: empty column set");
  if (weights.size() != static_cast<std::size_t>(ds.n())) {
    throw Error("logreg: weight length mismatch");
  }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), ds.n());
  LogisticObjective f(ds.X(Eigen::all, cols), ds.y, w, h.lambda);
  const Eigen::VectorXd params = minimize(f, h);
  LinearClassifier c;
  c.cols = cols;
  c.coeffs = params.head(static_cast<Eigen::Index>(cols.size()));
  c.intercept = params[static_cast<Eigen::Index>(cols.size())];
  return c;
}

inline LinearClassifier fit_logreg(const Dataset& ds, const IndexSet& cols,
                                   const LogRegHyper& h = {}) {
  const std::vector<double> ones(static_cast<std::size_t>(ds.n()), 1.0);
  return fit_logreg_weighted(ds, cols, ones, h);
}

// Public weak learner used by the boosting loop by default.
struct LogRegLearner {
  LogRegHyper hyper;
  LinearClassifier operator()(const Dataset& ds, const IndexSet& cols,
                              std::span<const double> weights) const {
    return fit_logreg_weighted(ds, cols, weights, hyper);
  }
};

// LogRegLearner that returns its previous fit when called again with the
// same dataset, columns and bit-identical weights. Single-owner.
struct CachedLogRegLearner {
  LogRegHyper hyper;
  mutable const Dataset* last_ds = nullptr;
  mutable IndexSet last_cols;
  mutable std::vector<double> last_w;
  mutable LinearClassifier last_fit;
  mutable int fits = 0;

  LinearClassifier operator()(const Dataset& ds, const IndexSet& cols,
                              std::span<const double> weights) const {
    if (last_ds == &ds && last_cols == cols &&
        std::equal(weights.begin(), weights.end(), last_w.begin(), last_w.end())) {
      return last_fit;
    }
    last_fit = fit_logreg_weighted(ds, cols, weights, hyper);
    last_ds = &ds;
    last_cols = cols;
    last_w.assign(weights.begin(), weights.end());
    ++fits;
    return last_fit;
  }
};

struct DpLogRegInfo {
  double epsilon_prime = 0.0;  // budget left for the noise vector
  double extra_lambda = 0.0;   // ridge added when epsilon_prime <= 0
  double noise_norm = 0.0;
  std::uint64_t noise_words = 0;  // rng words spent on the noise vector
};

// Objective perturbation for logistic loss (c = 1/4). Rows are augmented
// with a constant 1 and divided by sqrt(k + 1) so that |x| <= 1; the
// intercept is the last coefficient and is regularized with the rest.
//   eps' = eps - 2 log(1 + 1/(4 n lambda)); if eps' <= 0 the ridge grows by
//   1/(4 n (e^{eps/4} - 1)) - lambda and eps' = eps / 2.
//   |b| ~ Gamma(k + 1, 2 / eps'), direction uniform on the sphere.
inline LinearClassifier fit_dp_logreg(const Dataset& ds, const IndexSet& cols,
                                      double epsilon, const LogRegHyper& h,
                                      SeededRng& rng, DpLogRegInfo* info = nullptr) {
  h.validate();
  if (!(epsilon > 0.0)) throw Error("dp logreg: epsilon must be positive");
  if (cols.empty()) throw Error("dp logreg: empty column set");
  if (!ds.normalized) throw Error("dp logreg: features must lie in [-1, 1]");
  if (!(h.lambda > 0.0)) throw Error("dp logreg: lambda must be positive");
  const auto n = static_cast<double>(ds.n());
  const auto k = static_cast<Eigen::Index>(cols.size());
  const Eigen::Index dim = k + 1;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));

  // The optimizer works in unscaled coordinates phi = theta * scale, which
  // has the same minimizer with ridge / scale^2 and linear term b / scale.
  Eigen::MatrixXd Xa(ds.n(), dim);
  Xa.leftCols(k) = ds.X(Eigen::all, cols);
  Xa.col(k).setOnes();

  double eps_prime = epsilon - 2.0 * std::log1p(1.0 / (4.0 * n * h.lambda));
  double extra = 0.0;
  if (eps_prime <= 0.0) {
    extra = 1.0 / (4.0 * n * std::expm1(epsilon / 4.0)) - h.lambda;
    eps_prime = epsilon / 2.0;
  }
  if (!(eps_prime > 0.0) || !std::isfinite(extra) || !std::isfinite(eps_prime)) {
    throw Error("dp logreg: no admissible regularization for this n and epsilon");
  }

  const std::uint64_t before = rng.draws();
  // Gamma(dim, 2/eps') as a sum of dim unit exponentials.
  double norm = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) norm -= std::log(rng.uniform01_open());
  norm *= 2.0 / eps_prime;
  Eigen::VectorXd dir(dim);
  for (Eigen::Index i = 0; i < dim; ++i) dir[i] = rng.standard_normal();
  const double dn = dir.norm();
  if (!(dn > 0.0)) throw Error("dp logreg: degenerate noise direction");
  Eigen::VectorXd b = dir * (norm / dn);

  LogisticObjective f(std::move(Xa), ds.y, Eigen::VectorXd::Ones(ds.n()),
                      (h.lambda + extra) / (scale * scale), /*fit_intercept=*/false);
  f.set_linear_term(b / scale);
  const Eigen::VectorXd phi = minimize(f, h);

  if (info) {
    info->epsilon_prime = eps_prime;
    info->extra_lambda = extra;
    info->noise_norm = norm;
    info->noise_words = rng.draws() - before;
  }
  LinearClassifier c;
  c.cols = cols;
  c.coeffs = phi.head(k);
  c.intercept = phi[k];
  return c;
}

}  // namespace dpboost
