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

// Privacy measures for the pair and list protocols.
//
// Entropy measures (in bits): H[T] of the true choice, the divulged
// information I[T;R] and the retained privacy H[T|R] given the response.
// Jeopardy measures: for a sensitive party s,
//
//   J(r) = P(R = r | T = s) / P(R = r | T != s),
//
// its maximum over responses and its plain average J-bar over all possible
// responses (zero-jeopardy responses included).

#ifndef ANONPOLL_PRIVACY_H_
#define ANONPOLL_PRIVACY_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anonpoll/design.hpp"

namespace anonpoll {

// -sum p_k log2 p_k with 0 log 0 = 0.
double Entropy(std::span<const double> p);
double Entropy(const Preferences& p);

struct ResponseDetail {
  std::string label;
  double probability = 0.0;         // P(R = r)
  double designated_posterior = 0;  // P(T = s | R = r), 0 if s not in r
};

struct PrivacyReport {
  double h_t = 0.0;          // H[T]
  double i_tr = 0.0;         // I[T;R]
  double h_t_given_r = 0.0;  // H[T|R]
  double h_r = 0.0;          // H[R]
  // -max_r log2 P(T = s | R = r) for the designated party s.
  std::optional<double> worst_case_retained;
  std::optional<int> designated_party;
  std::vector<ResponseDetail> detail;
};

struct JeopardyReport {
  std::vector<int> sensitive;
  std::vector<std::string> response_labels;
  std::vector<double> per_response;  // J(r); +inf for full disclosure
  double max_j = 0.0;                // max over responses with J(r) > 0
  double mean_j = 0.0;               // J-bar; +inf if any J(r) is infinite
  double kl_j = 0.0;                 // E_{R|T in S}[log2 J(R)]
  std::vector<int> infinite_responses;
};

struct KlJeopardyResult {
  double bits = 0.0;  // +inf when absolute continuity fails
  // Responses possible under S but impossible under its complement.
  std::vector<int> violating_responses;
};

// Channel P(R = r | T = t) as a responses x parties matrix. This is the
// stacked design matrix: for the list method the rows (l, yes) and (l, no)
// carry the list weight alpha_l.
Eigen::MatrixXd ResponseChannel(const SurveyDesign& design);

// Response labels in channel row order, e.g. "{SD,O}" or "L3+".
std::vector<std::string> ResponseLabels(const PairDesign& design,
                                        const Preferences& p);
std::vector<std::string> ResponseLabels(const ListDesign& design);

// Closed-form pair-method entropy measures. Throws ZeroProbabilityParty if
// a designated party with zero support is given.
PrivacyReport PairPrivacy(const Preferences& p,
                          std::optional<int> designated = std::nullopt);

PrivacyReport ListPrivacy(const Preferences& p, const ListDesign& design,
                          std::optional<int> designated = std::nullopt);

JeopardyReport PairJeopardy(const Preferences& p, int sensitive);

JeopardyReport ListJeopardy(const Preferences& p, const ListDesign& design,
                            int sensitive);

// D_KL(P(R | T in S) || P(R | T not in S)) in bits. Throws
// EmptySensitiveSet; requires 0 < P(T in S) < 1.
KlJeopardyResult KlJeopardy(const Eigen::MatrixXd& channel,
                            const Preferences& p, std::span<const int> sensitive);
KlJeopardyResult KlJeopardy(const PairDesign& design, const Preferences& p,
                            std::span<const int> sensitive);
KlJeopardyResult KlJeopardy(const ListDesign& design, const Preferences& p,
                            std::span<const int> sensitive);

}  // namespace anonpoll

#endif  // ANONPOLL_PRIVACY_H_
