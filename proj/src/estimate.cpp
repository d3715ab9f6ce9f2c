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

#include "anonpoll/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anonpoll/error.hpp"
#include "anonpoll/normal.hpp"

namespace anonpoll {
namespace {

void CheckCountsMatch(const SurveyDesign& design,
                      const ResponseCounts& counts) {
  if (counts.blocks.size() != design.blocks().size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "counts have " + std::to_string(counts.blocks.size()) +
                    " blocks, design has " +
                    std::to_string(design.blocks().size()));
  }
  for (size_t i = 0; i < counts.blocks.size(); ++i) {
    const auto rows = static_cast<size_t>(design.blocks()[i].matrix.rows());
    if (counts.blocks[i].size() != rows) {
      throw Error(ErrorCode::kLengthMismatch,
                  "block " + design.blocks()[i].label + " expects " +
                      std::to_string(rows) + " counts");
    }
    for (int64_t c : counts.blocks[i]) {
      if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative count");
    }
  }
}

std::vector<double> AlphasFromAllocations(std::span<const int64_t> allocations) {
  int64_t total = 0;
  for (int64_t a : allocations) {
    if (a <= 0) {
      throw Error(ErrorCode::kEmptyBlock,
                  "every block needs at least one respondent");
    }
    total += a;
  }
  std::vector<double> alphas;
  alphas.reserve(allocations.size());
  for (int64_t a : allocations) {
    alphas.push_back(static_cast<double>(a) / static_cast<double>(total));
  }
  return alphas;
}

// Cholesky factor of A'A; a failed factorisation means A is not of full
// column rank.
Eigen::LLT<Eigen::MatrixXd> FactorGram(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a.transpose() * a);
  if (llt.info() != Eigen::Success) {
    RequireFullColumnRank(a);
    throw RankDeficientError("A'A is not positive definite", NumericalRank(a),
                             Eigen::VectorXd::Zero(a.cols()));
  }
  return llt;
}

Eigen::MatrixXd Symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// V(u) = diag(u) - u u'.
Eigen::MatrixXd MultinomialV(const Eigen::VectorXd& u) {
  Eigen::MatrixXd v = -u * u.transpose();
  v.diagonal() += u;
  return v;
}

bool OutsideUnitCube(const Eigen::VectorXd& p) {
  return (p.array() < 0.0).any() || (p.array() > 1.0).any();
}

}  // namespace

int64_t ResponseCounts::BlockTotal(size_t i) const {
  return std::accumulate(blocks[i].begin(), blocks[i].end(), int64_t{0});
}

int64_t ResponseCounts::Total() const {
  int64_t total = 0;
  for (size_t i = 0; i < blocks.size(); ++i) total += BlockTotal(i);
  return total;
}

std::vector<int64_t> ResponseCounts::BlockTotals() const {
  std::vector<int64_t> out;
  out.reserve(blocks.size());
  for (size_t i = 0; i < blocks.size(); ++i) out.push_back(BlockTotal(i));
  return out;
}

Eigen::MatrixXd DesignCovarianceAt(const SurveyDesign& design,
                                   const Eigen::VectorXd& p,
                                   std::span<const double> alphas, double n) {
  if (p.size() != design.n_parties()) {
    throw Error(ErrorCode::kLengthMismatch, "p has the wrong length");
  }
  if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
  const Eigen::MatrixXd a = StackWithAlphas(design, alphas);
  const auto llt = FactorGram(a);
  const int np = design.n_parties();
  Eigen::MatrixXd middle = Eigen::MatrixXd::Zero(np, np);
  for (size_t i = 0; i < alphas.size(); ++i) {
    const Eigen::MatrixXd& ai = design.blocks()[i].matrix;
    const double a3 = alphas[i] * alphas[i] * alphas[i];
    middle += a3 * (ai.transpose() * MultinomialV(ai * p) * ai);
  }
  // G^{-1} S G^{-1} with both G and S symmetric.
  Eigen::MatrixXd left = llt.solve(middle);
  Eigen::MatrixXd cov = llt.solve(left.transpose()).transpose();
  return Symmetrize(cov) / n;
}

Eigen::MatrixXd DesignCovariance(const SurveyDesign& design,
                                 const Preferences& p,
                                 std::span<const int64_t> allocations) {
  if (allocations.size() != design.blocks().size()) {
    throw Error(ErrorCode::kLengthMismatch, "need one allocation per block");
  }
  const std::vector<double> alphas = AlphasFromAllocations(allocations);
  const double n = static_cast<double>(
      std::accumulate(allocations.begin(), allocations.end(), int64_t{0}));
  return DesignCovarianceAt(design, p.p(), alphas, n);
}

Eigen::MatrixXd ListCovariance(const ListDesign& design, const Preferences& p,
                               int64_t n, std::span<const int64_t> allocations) {
  const int64_t total =
      std::accumulate(allocations.begin(), allocations.end(), int64_t{0});
  if (total != n) {
    throw Error(ErrorCode::kInvalidArgument,
                "list allocations sum to " + std::to_string(total) +
                    ", expected " + std::to_string(n));
  }
  return DesignCovariance(design.survey(), p, allocations);
}

Eigen::MatrixXd ListCovariance(const ListDesign& design, const Preferences& p,
                               double n) {
  return DesignCovarianceAt(design.survey(), p.p(), design.weights(), n);
}

Eigen::MatrixXd AsymptoticCovariance(const SurveyDesign& design,
                                     const Preferences& p,
                                     std::span<const double> limit_alphas) {
  if (limit_alphas.size() != design.blocks().size()) {
    throw Error(ErrorCode::kLengthMismatch, "need one limit alpha per block");
  }
  double total = 0.0;
  for (double a : limit_alphas) {
    if (!(a > 0.0)) {
      throw Error(ErrorCode::kAlphaNotPositive,
                  "limiting alphas must be strictly positive");
    }
    total += a;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorCode::kBadWeights, "limiting alphas must sum to 1");
  }
  return DesignCovarianceAt(design, p.p(), limit_alphas, 1.0);
}

Eigen::MatrixXd PairCovarianceAt(const Eigen::VectorXd& p, double n) {
  const Eigen::Index np = p.size();
  if (np < 3) throw Error(ErrorCode::kTooFewParties, "pair method needs N >= 3");
  const double nm2 = static_cast<double>(np - 2);
  Eigen::MatrixXd cov(np, np);
  for (Eigen::Index i = 0; i < np; ++i) {
    cov(i, i) = ((1.0 + (np - 3) * p[i]) / nm2 - p[i] * p[i]) / n;
    for (Eigen::Index j = i + 1; j < np; ++j) {
      const double c = -((1.0 - p[i] - p[j]) / (nm2 * nm2) + p[i] * p[j]) / n;
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

Eigen::MatrixXd PairCovariance(const Preferences& p, double n) {
  if (!(n >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  return PairCovarianceAt(p.p(), n);
}

Eigen::MatrixXd BinomialCovariance(const Preferences& p, double n) {
  if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
  return MultinomialV(p.p()) / n;
}

EstimateResult EstimateGeneral(const SurveyDesign& design,
                               const ResponseCounts& counts,
                               const std::optional<Eigen::VectorXd>& known_p) {
  CheckCountsMatch(design, counts);
  const std::vector<int64_t> totals = counts.BlockTotals();
  const std::vector<double> alphas = AlphasFromAllocations(totals);
  const int64_t n = counts.Total();

  const Eigen::MatrixXd a = StackWithAlphas(design, alphas);
  Eigen::VectorXd x(a.rows());
  Eigen::Index row = 0;
  for (const auto& block : counts.blocks) {
    for (int64_t c : block) x[row++] = static_cast<double>(c);
  }
  const auto llt = FactorGram(a);

  EstimateResult result;
  result.p_hat = llt.solve(a.transpose() * x) / static_cast<double>(n);
  result.n = n;
  switch (design.kind()) {
    case DesignKind::kPair:
      result.method = MethodTag::kPair;
      break;
    case DesignKind::kList:
      result.method = MethodTag::kList;
      break;
    case DesignKind::kGeneral:
      result.method = MethodTag::kGeneral;
      break;
  }
  const Eigen::VectorXd& at = known_p ? *known_p : result.p_hat;
  result.cov_kind = known_p ? CovarianceKind::kKnownP : CovarianceKind::kPlugIn;
  result.possibly_indefinite = !known_p && OutsideUnitCube(result.p_hat);
  result.cov = DesignCovarianceAt(design, at, alphas, static_cast<double>(n));
  return result;
}

EstimateResult PairEstimate(int n_parties, std::span<const int64_t> counts,
                            const std::optional<Eigen::VectorXd>& known_p) {
  if (n_parties < 3) {
    throw Error(ErrorCode::kTooFewParties, "pair method needs N >= 3");
  }
  const size_t m = static_cast<size_t>(n_parties) * (n_parties - 1) / 2;
  if (counts.size() != m) {
    throw Error(ErrorCode::kLengthMismatch,
                "expected " + std::to_string(m) + " pair counts, got " +
                    std::to_string(counts.size()));
  }
  int64_t n = 0;
  for (int64_t c : counts) {
    if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative count");
    n += c;
  }
  if (n == 0) throw Error(ErrorCode::kEmptyBlock, "no responses");

  // Row sums of B u_hat: the share of responses naming each party.
  Eigen::VectorXd named = Eigen::VectorXd::Zero(n_parties);
  size_t k = 0;
  for (int i = 0; i < n_parties; ++i) {
    for (int j = i + 1; j < n_parties; ++j, ++k) {
      const double u = static_cast<double>(counts[k]) / static_cast<double>(n);
      named[i] += u;
      named[j] += u;
    }
  }
  const double nm1 = n_parties - 1.0;
  const double nm2 = n_parties - 2.0;

  EstimateResult result;
  result.p_hat = (nm1 / nm2) * named.array() - 1.0 / nm2;
  result.n = n;
  result.method = MethodTag::kPair;
  const Eigen::VectorXd& at = known_p ? *known_p : result.p_hat;
  result.cov_kind = known_p ? CovarianceKind::kKnownP : CovarianceKind::kPlugIn;
  result.possibly_indefinite = !known_p && OutsideUnitCube(result.p_hat);
  result.cov = PairCovarianceAt(at, static_cast<double>(n));
  return result;
}

std::vector<Interval> ConfidenceIntervals(const EstimateResult& result,
                                          double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "level must lie in (0, 1)");
  }
  const double z = NormalQuantile(0.5 * (1.0 + level));
  std::vector<Interval> out;
  out.reserve(result.p_hat.size());
  for (Eigen::Index i = 0; i < result.p_hat.size(); ++i) {
    // A plug-in variance can come out slightly negative; treat as zero width.
    const double var = std::max(result.cov(i, i), 0.0);
    const double half = z * std::sqrt(var);
    Interval iv{result.p_hat[i] - half, result.p_hat[i] + half, false};
    iv.outside_unit = iv.lower < 0.0 || iv.upper > 1.0;
    out.push_back(iv);
  }
  return out;
}

Eigen::VectorXd ProjectToSimplex(const Eigen::VectorXd& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0);
}

LinearEstimator::LinearEstimator(const SurveyDesign& design,
                                 std::span<const int64_t> allocations) {
  if (allocations.size() != design.blocks().size()) {
    throw Error(ErrorCode::kLengthMismatch, "need one allocation per block");
  }
  const std::vector<double> alphas = AlphasFromAllocations(allocations);
  allocations_.assign(allocations.begin(), allocations.end());
  n_ = std::accumulate(allocations.begin(), allocations.end(), int64_t{0});
  const Eigen::MatrixXd a = StackWithAlphas(design, alphas);
  const auto llt = FactorGram(a);
  pinv_ = llt.solve(a.transpose()) / static_cast<double>(n_);
}

Eigen::VectorXd LinearEstimator::Apply(
    std::span<const int64_t> flat_counts) const {
  if (static_cast<Eigen::Index>(flat_counts.size()) != pinv_.cols()) {
    throw Error(ErrorCode::kLengthMismatch, "wrong number of counts");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(pinv_.rows());
  for (size_t k = 0; k < flat_counts.size(); ++k) {
    if (flat_counts[k] != 0) {
      out += static_cast<double>(flat_counts[k]) * pinv_.col(k);
    }
  }
  return out;
}

Eigen::VectorXd LinearEstimator::Apply(const ResponseCounts& counts) const {
  if (counts.BlockTotals() != allocations_) {
    throw Error(ErrorCode::kLengthMismatch,
                "block totals differ from the estimator's allocations");
  }
  std::vector<int64_t> flat;
  for (const auto& block : counts.blocks) {
    flat.insert(flat.end(), block.begin(), block.end());
  }
  return Apply(flat);
}

}  // namespace anonpoll
