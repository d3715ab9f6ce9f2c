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

#include "anonpoll/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "anonpoll/error.hpp"

namespace anonpoll {
namespace {

std::vector<std::string> DefaultLabels(int n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  return labels;
}

void ValidateWeights(std::span<const double> weights) {
  if (weights.empty()) throw Error(ErrorCode::kBadWeights, "no weights given");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || w > 1.0) {
      throw Error(ErrorCode::kBadWeights,
                  "weights must lie in (0, 1], got " + std::to_string(w));
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorCode::kBadWeights,
                "weights must sum to 1, got " + std::to_string(total));
  }
}

// Visits all size-k subsets of {first, ..., n-1} in lexicographic order.
template <typename Fn>
void ForEachCombination(int first, int n, int k, Fn&& fn) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), first);
  if (k > n - first) return;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

Preferences::Preferences(std::vector<std::string> labels, Eigen::VectorXd p)
    : labels_(std::move(labels)), p_(std::move(p)) {
  if (p_.size() < 2) {
    throw Error(ErrorCode::kInvalidPreferences, "need at least 2 parties");
  }
  if (labels_.size() != static_cast<size_t>(p_.size())) {
    throw Error(ErrorCode::kInvalidPreferences,
                "label count does not match probability vector length");
  }
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (!(p_[i] >= 0.0) || !std::isfinite(p_[i])) {
      throw Error(ErrorCode::kInvalidPreferences,
                  "probability of party " + labels_[i] + " is negative");
    }
  }
  if (std::abs(p_.sum() - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorCode::kInvalidPreferences,
                "probabilities must sum to 1, got " + std::to_string(p_.sum()));
  }
}

Preferences::Preferences(const Eigen::VectorXd& p)
    : Preferences(DefaultLabels(static_cast<int>(p.size())), p) {}

Preferences Preferences::Uniform(int n_parties) {
  return Preferences(Eigen::VectorXd::Constant(n_parties, 1.0 / n_parties));
}

int Preferences::IndexOf(std::string_view label) const {
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<int>(i);
  }
  return -1;
}

SurveyDesign::SurveyDesign(std::vector<DesignBlock> blocks, int n_parties,
                           DesignKind kind)
    : blocks_(std::move(blocks)), n_parties_(n_parties), kind_(kind) {
  if (n_parties_ < 2) {
    throw Error(ErrorCode::kTooFewParties, "a design needs at least 2 parties");
  }
  if (blocks_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "a design needs at least one block");
  }
  std::vector<double> w;
  for (const DesignBlock& b : blocks_) {
    if (b.matrix.cols() != n_parties_ || b.matrix.rows() < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "block " + b.label + " has wrong shape");
    }
    if ((b.matrix.array() < 0.0).any()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "block " + b.label + " has negative entries");
    }
    Eigen::RowVectorXd sums = b.matrix.colwise().sum();
    for (Eigen::Index k = 0; k < sums.size(); ++k) {
      if (std::abs(sums[k] - 1.0) > kProbabilityTolerance) {
        throw Error(ErrorCode::kInvalidArgument,
                    "column " + std::to_string(k + 1) + " of block " +
                        b.label + " does not sum to 1");
      }
    }
    w.push_back(b.weight);
  }
  ValidateWeights(w);
  RequireFullColumnRank(Stack(*this).matrix);
}

int SurveyDesign::num_responses() const {
  int total = 0;
  for (const DesignBlock& b : blocks_) total += static_cast<int>(b.matrix.rows());
  return total;
}

std::vector<double> SurveyDesign::weights() const {
  std::vector<double> w;
  w.reserve(blocks_.size());
  for (const DesignBlock& b : blocks_) w.push_back(b.weight);
  return w;
}

Eigen::MatrixXd StackWithAlphas(const SurveyDesign& design,
                                std::span<const double> alphas) {
  if (alphas.size() != design.blocks().size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "need one alpha per design block");
  }
  Eigen::MatrixXd a(design.num_responses(), design.n_parties());
  Eigen::Index row = 0;
  for (size_t i = 0; i < alphas.size(); ++i) {
    const Eigen::MatrixXd& m = design.blocks()[i].matrix;
    a.middleRows(row, m.rows()) = alphas[i] * m;
    row += m.rows();
  }
  return a;
}

StackedMatrix Stack(const SurveyDesign& design) {
  std::vector<double> w = design.weights();
  StackedMatrix out;
  out.matrix = StackWithAlphas(design, w);
  out.rank = NumericalRank(out.matrix);
  return out;
}

int NumericalRank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                     std::numeric_limits<double>::epsilon() * s[0];
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol) ++rank;
  }
  return rank;
}

void RequireFullColumnRank(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                     std::numeric_limits<double>::epsilon() *
                     (s.size() > 0 ? s[0] : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol) ++rank;
  }
  if (rank == m.cols()) return;
  // Singular values are sorted, so the last right singular vector spans
  // (part of) the null space.
  Eigen::VectorXd direction = svd.matrixV().col(m.cols() - 1);
  throw RankDeficientError("stacked design has rank " + std::to_string(rank) +
                               " < " + std::to_string(m.cols()),
                           rank, direction);
}

PairDesign::PairDesign(int n_parties, std::vector<std::pair<int, int>> pairs,
                       SurveyDesign survey)
    : n_parties_(n_parties),
      pairs_(std::move(pairs)),
      survey_(std::move(survey)) {}

int PairDesign::PairIndex(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= n_parties_ || j >= n_parties_) {
    throw Error(ErrorCode::kInvalidArgument, "not a pair of distinct parties");
  }
  if (i > j) std::swap(i, j);
  // Pairs {i, *} start after the N-1 + N-2 + ... + N-i pairs of smaller i.
  const int n = n_parties_;
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

PairDesign BuildPairDesign(int n_parties) {
  if (n_parties < 3) {
    throw Error(ErrorCode::kTooFewParties,
                "the pair method needs at least 3 parties");
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n_parties; ++i) {
    for (int j = i + 1; j < n_parties; ++j) pairs.emplace_back(i, j);
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(pairs.size(), n_parties);
  const double entry = 1.0 / (n_parties - 1);
  for (size_t k = 0; k < pairs.size(); ++k) {
    a(k, pairs[k].first) = entry;
    a(k, pairs[k].second) = entry;
  }
  std::vector<DesignBlock> blocks{{std::move(a), 1.0, "pairs"}};
  SurveyDesign survey(std::move(blocks), n_parties, DesignKind::kPair);
  return PairDesign(n_parties, std::move(pairs), std::move(survey));
}

std::vector<int> CanonicalizeList(int n_parties, std::vector<int> list) {
  std::sort(list.begin(), list.end());
  if (list.empty()) throw Error(ErrorCode::kInvalidList, "empty list");
  if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
    throw Error(ErrorCode::kInvalidList, "list repeats a party");
  }
  if (list.front() < 0 || list.back() >= n_parties) {
    throw Error(ErrorCode::kInvalidList, "list names an unknown party");
  }
  if (static_cast<int>(list.size()) == n_parties) {
    throw Error(ErrorCode::kInvalidList, "list contains every party");
  }
  if (list.front() == 0) return list;
  std::vector<int> complement;
  for (int k = 0, pos = 0; k < n_parties; ++k) {
    if (pos < static_cast<int>(list.size()) && list[pos] == k) {
      ++pos;
    } else {
      complement.push_back(k);
    }
  }
  return complement;
}

ListDesign::ListDesign(int n_parties, std::vector<std::vector<int>> lists,
                       std::vector<double> weights, SurveyDesign survey)
    : n_parties_(n_parties),
      lists_(std::move(lists)),
      weights_(std::move(weights)),
      survey_(std::move(survey)) {
  membership_.assign(lists_.size(), std::vector<bool>(n_parties_, false));
  for (size_t l = 0; l < lists_.size(); ++l) {
    for (int k : lists_[l]) membership_[l][k] = true;
  }
}

std::vector<int> ListDesign::Complement(int l) const {
  std::vector<int> out;
  for (int k = 0; k < n_parties_; ++k) {
    if (!membership_[l][k]) out.push_back(k);
  }
  return out;
}

ListDesign BuildCustomListDesign(int n_parties,
                                 std::vector<std::vector<int>> lists,
                                 std::vector<double> weights) {
  if (n_parties < 2) {
    throw Error(ErrorCode::kTooFewParties, "need at least 2 parties");
  }
  if (lists.empty()) throw Error(ErrorCode::kInvalidList, "no lists given");
  if (weights.size() != lists.size()) {
    throw Error(ErrorCode::kBadWeights, "need one weight per list");
  }
  ValidateWeights(weights);
  std::vector<DesignBlock> blocks;
  blocks.reserve(lists.size());
  for (size_t l = 0; l < lists.size(); ++l) {
    lists[l] = CanonicalizeList(n_parties, std::move(lists[l]));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, n_parties);
    a.row(1).setOnes();
    for (int k : lists[l]) {
      a(0, k) = 1.0;
      a(1, k) = 0.0;
    }
    blocks.push_back({std::move(a), weights[l], "L" + std::to_string(l + 1)});
  }
  SurveyDesign survey(std::move(blocks), n_parties, DesignKind::kList);
  return ListDesign(n_parties, std::move(lists), std::move(weights),
                    std::move(survey));
}

ListDesign BuildBalancedListDesign(int n_parties) {
  if (n_parties % 2 != 0) {
    throw Error(ErrorCode::kOddN,
                "balanced list designs need an even number of parties");
  }
  if (n_parties < 4) {
    throw Error(ErrorCode::kTooFewParties,
                "balanced list designs need at least 4 parties");
  }
  const int half = n_parties / 2;
  std::vector<std::vector<int>> lists;
  ForEachCombination(1, n_parties, half - 1, [&](const std::vector<int>& c) {
    std::vector<int> list{0};
    list.insert(list.end(), c.begin(), c.end());
    lists.push_back(std::move(list));
  });
  std::vector<double> weights(lists.size(), 1.0 / lists.size());
  return BuildCustomListDesign(n_parties, std::move(lists), std::move(weights));
}

}  // namespace anonpoll
