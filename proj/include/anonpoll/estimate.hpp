// Copyright 2026 The anonpoll Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Unbiased least-squares estimation of the preference vector from survey
// responses, with exact and asymptotic covariances.
//
// For blocks X_i ~ Mult(n_i, A_i p) and the stack A with rows alpha_i A_i,
// alpha_i = n_i / n, the estimator is
//
//   p_hat = (A'A)^{-1} A' X / n
//
// with covariance
//
//   (1/n) (A'A)^{-1} (sum_i alpha_i^3 A_i' V(A_i p) A_i) (A'A)^{-1},
//
// where V(u) = diag(u) - u u'. p_hat can leave the simplex; it is never
// clipped here.

#ifndef ANONPOLL_ESTIMATE_H_
#define ANONPOLL_ESTIMATE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anonpoll/design.hpp"

namespace anonpoll {

// Per-block response counts X_i, in design block order.
struct ResponseCounts {
  std::vector<std::vector<int64_t>> blocks;
  std::vector<std::string> labels;  // optional, one per block

  int64_t BlockTotal(size_t i) const;
  int64_t Total() const;
  std::vector<int64_t> BlockTotals() const;

  friend bool operator==(const ResponseCounts&, const ResponseCounts&) = default;
};

enum class MethodTag { kPair, kList, kGeneral };

enum class CovarianceKind {
  kPlugIn,  // evaluated at p_hat
  kKnownP,  // evaluated at a caller-supplied p
};

struct EstimateResult {
  Eigen::VectorXd p_hat;
  Eigen::MatrixXd cov;  // already divided by n
  int64_t n = 0;
  MethodTag method = MethodTag::kGeneral;
  CovarianceKind cov_kind = CovarianceKind::kPlugIn;
  // True for plug-in covariances evaluated at a p_hat outside [0, 1]^N; the
  // matrix may then be indefinite.
  bool possibly_indefinite = false;

  bool negative_entries() const { return (p_hat.array() < 0.0).any(); }
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool outside_unit = false;  // extends beyond [0, 1]; never clipped
};

// General estimator using the empirical alphas n_i / n. Throws EmptyBlock,
// LengthMismatch, RankDeficientError.
EstimateResult EstimateGeneral(
    const SurveyDesign& design, const ResponseCounts& counts,
    const std::optional<Eigen::VectorXd>& known_p = std::nullopt);

// Closed-form pair estimator
//   p_hat_i = (N-1)/(N-2) sum_j u_hat_ij - 1/(N-2)
// over the lexicographic pair counts.
EstimateResult PairEstimate(
    int n_parties, std::span<const int64_t> counts,
    const std::optional<Eigen::VectorXd>& known_p = std::nullopt);

// Closed-form pair covariance:
//   Var  = ((1 + (N-3) p_i) / (N-2) - p_i^2) / n
//   Cov  = -((1 - p_i - p_j) / (N-2)^2 + p_i p_j) / n
Eigen::MatrixXd PairCovariance(const Preferences& p, double n);

// Same formula without validating p (used for plug-in at p_hat).
Eigen::MatrixXd PairCovarianceAt(const Eigen::VectorXd& p, double n);

// Covariance of p_hat for the given alphas and total sample size n. p is not
// validated, so plug-in values outside the simplex are allowed.
Eigen::MatrixXd DesignCovarianceAt(const SurveyDesign& design,
                                   const Eigen::VectorXd& p,
                                   std::span<const double> alphas, double n);

// Exact covariance for integer block allocations n_i (alpha_i = n_i / n).
Eigen::MatrixXd DesignCovariance(const SurveyDesign& design,
                                 const Preferences& p,
                                 std::span<const int64_t> allocations);

// List-method covariance. Allocations must sum to n.
Eigen::MatrixXd ListCovariance(const ListDesign& design, const Preferences& p,
                               int64_t n, std::span<const int64_t> allocations);

// List-method covariance at the design weights (fractional allocations
// alpha_l * n), e.g. n = 1 for the per-respondent variance.
Eigen::MatrixXd ListCovariance(const ListDesign& design, const Preferences& p,
                               double n);

// Covariance of the Gaussian limit of sqrt(n) (p_hat - p) for limiting
// alphas. Throws AlphaNotPositive and BadWeights.
Eigen::MatrixXd AsymptoticCovariance(const SurveyDesign& design,
                                     const Preferences& p,
                                     std::span<const double> limit_alphas);

// Direct-poll (multinomial ML) covariance V(p) / n.
Eigen::MatrixXd BinomialCovariance(const Preferences& p, double n);

// Wald intervals p_hat_i +- z_{(1+level)/2} sqrt(cov_ii).
std::vector<Interval> ConfidenceIntervals(const EstimateResult& result,
                                          double level);

// Euclidean projection onto the probability simplex. Post-processing only;
// variance and power computations never use it.
Eigen::VectorXd ProjectToSimplex(const Eigen::VectorXd& v);

// Precomputed (A'A)^{-1} A' for fixed block allocations, for repeated
// estimation in simulation loops.
class LinearEstimator {
 public:
  LinearEstimator(const SurveyDesign& design,
                  std::span<const int64_t> allocations);

  // counts flattened in block order, length sum K_i. Block totals are
  // assumed to equal the allocations.
  Eigen::VectorXd Apply(std::span<const int64_t> flat_counts) const;
  Eigen::VectorXd Apply(const ResponseCounts& counts) const;

  const Eigen::MatrixXd& pseudo_inverse() const { return pinv_; }

 private:
  Eigen::MatrixXd pinv_;  // N x sum K_i, includes the 1/n factor
  std::vector<int64_t> allocations_;
  int64_t n_ = 0;
};

}  // namespace anonpoll

#endif  // ANONPOLL_ESTIMATE_H_
