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

// Response-channel designs for anonymised multiple-choice surveys.
//
// A survey design is a stack of blocks (A_i, alpha_i). Respondents assigned
// to block i answer with one of K_i responses, and the response law is
// u_i = A_i p where p is the distribution of true choices. Every A_i is
// column stochastic. The stacked matrix with rows alpha_i A_i must have full
// column rank for p to be identifiable.
//
// Two protocols are provided:
//   * the pair method: the respondent reports her choice together with a
//     uniformly drawn other party, unordered;
//   * the list method: the respondent says whether her choice is on a shown
//     list. Each list block has a "yes" row (the list) and a "no" row (its
//     complement).
//
// Party indices are 0-based in this API. Party 0 is the paper convention's
// "party 1" and is always on the yes side of a canonical list.

#ifndef ANONPOLL_DESIGN_H_
#define ANONPOLL_DESIGN_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace anonpoll {

inline constexpr double kProbabilityTolerance = 1e-12;

// Distribution of the true choice over N labelled parties.
class Preferences {
 public:
  Preferences(std::vector<std::string> labels, Eigen::VectorXd p);
  // Labels default to "1", "2", ..., "N".
  explicit Preferences(const Eigen::VectorXd& p);

  static Preferences Uniform(int n_parties);

  int size() const { return static_cast<int>(p_.size()); }
  const Eigen::VectorXd& p() const { return p_; }
  double operator[](int i) const { return p_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Index of the party with this label, or -1.
  int IndexOf(std::string_view label) const;

 private:
  std::vector<std::string> labels_;
  Eigen::VectorXd p_;
};

struct DesignBlock {
  Eigen::MatrixXd matrix;  // K_i x N, column stochastic
  double weight = 1.0;     // alpha_i
  std::string label;
};

enum class DesignKind { kPair, kList, kGeneral };

// Immutable validated design. Construction checks column sums, weights and
// the full-column-rank condition.
class SurveyDesign {
 public:
  SurveyDesign(std::vector<DesignBlock> blocks, int n_parties,
               DesignKind kind = DesignKind::kGeneral);

  const std::vector<DesignBlock>& blocks() const { return blocks_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int n_parties() const { return n_parties_; }
  DesignKind kind() const { return kind_; }
  // Total number of responses, sum of K_i.
  int num_responses() const;
  std::vector<double> weights() const;

 private:
  std::vector<DesignBlock> blocks_;
  int n_parties_;
  DesignKind kind_;
};

struct StackedMatrix {
  Eigen::MatrixXd matrix;
  int rank = 0;
};

// Rows alpha_i A_i stacked in block order, with the design weights.
StackedMatrix Stack(const SurveyDesign& design);

// Same stack but with caller-supplied alphas (e.g. empirical n_i / n).
Eigen::MatrixXd StackWithAlphas(const SurveyDesign& design,
                                std::span<const double> alphas);

// Numerical rank: number of singular values above max(rows, cols) * eps *
// sigma_max.
int NumericalRank(const Eigen::MatrixXd& m);

// Throws RankDeficientError unless m has rank m.cols().
void RequireFullColumnRank(const Eigen::MatrixXd& m);

class PairDesign {
 public:
  int n_parties() const { return n_parties_; }
  int num_pairs() const { return static_cast<int>(pairs_.size()); }
  // Lexicographic {0,1}, {0,2}, ..., {N-2,N-1}.
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  // Position of the unordered pair {i, j} in the lexicographic order.
  int PairIndex(int i, int j) const;
  const SurveyDesign& survey() const { return survey_; }

 private:
  friend PairDesign BuildPairDesign(int n_parties);
  PairDesign(int n_parties, std::vector<std::pair<int, int>> pairs,
             SurveyDesign survey);

  int n_parties_;
  std::vector<std::pair<int, int>> pairs_;
  SurveyDesign survey_;
};

class ListDesign {
 public:
  int n_parties() const { return n_parties_; }
  int num_lists() const { return static_cast<int>(lists_.size()); }
  // Canonical yes-lists, sorted ascending, each containing party 0.
  const std::vector<std::vector<int>>& lists() const { return lists_; }
  std::vector<int> Complement(int l) const;
  bool OnList(int l, int party) const { return membership_[l][party]; }
  const std::vector<double>& weights() const { return weights_; }
  const SurveyDesign& survey() const { return survey_; }

 private:
  friend ListDesign BuildCustomListDesign(int n_parties,
                                          std::vector<std::vector<int>> lists,
                                          std::vector<double> weights);
  ListDesign(int n_parties, std::vector<std::vector<int>> lists,
             std::vector<double> weights, SurveyDesign survey);

  int n_parties_;
  std::vector<std::vector<int>> lists_;
  std::vector<std::vector<bool>> membership_;
  std::vector<double> weights_;
  SurveyDesign survey_;
};

// Throws TooFewParties for n_parties < 3.
PairDesign BuildPairDesign(int n_parties);

// All C(N-1, N/2-1) half-size lists containing party 0, equally weighted.
// Throws OddN for odd N and TooFewParties for N < 4.
ListDesign BuildBalancedListDesign(int n_parties);

// Lists may be given on either side; a list not containing party 0 is
// replaced by its complement. Throws InvalidList, BadWeights or
// RankDeficientError.
ListDesign BuildCustomListDesign(int n_parties,
                                 std::vector<std::vector<int>> lists,
                                 std::vector<double> weights);

// Sorted canonical form of a list: the side containing party 0.
std::vector<int> CanonicalizeList(int n_parties, std::vector<int> list);

}  // namespace anonpoll

#endif  // ANONPOLL_DESIGN_H_
