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

#include "anonpoll/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anonpoll/error.hpp"

namespace anonpoll {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x log2 x with 0 log 0 = 0.
double XLog2X(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

void CheckParty(const Preferences& p, int s) {
  if (s < 0 || s >= p.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "party index " + std::to_string(s + 1) + " out of range");
  }
}

void CheckSensitive(const Preferences& p, int s) {
  CheckParty(p, s);
  if (p[s] >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "jeopardy needs a party with support below 1");
  }
}

void CheckDesignedFor(const Preferences& p, int n_parties) {
  if (p.size() != n_parties) {
    throw Error(ErrorCode::kLengthMismatch,
                "preferences and design disagree on the number of parties");
  }
}

double SumOver(const Preferences& p, const std::vector<int>& parties) {
  double total = 0.0;
  for (int k : parties) total += p[k];
  return total;
}

double SumOverExcept(const Preferences& p, const std::vector<int>& parties,
                     int skip) {
  double total = 0.0;
  for (int k : parties) {
    if (k != skip) total += p[k];
  }
  return total;
}

double WorstCase(double p_s, double min_companions) {
  return -std::log2(p_s) + std::log2(p_s + min_companions);
}

void Finish(JeopardyReport& report) {
  report.max_j = 0.0;
  double sum = 0.0;
  for (size_t r = 0; r < report.per_response.size(); ++r) {
    const double j = report.per_response[r];
    if (std::isinf(j)) report.infinite_responses.push_back(static_cast<int>(r));
    if (j > 0.0) report.max_j = std::max(report.max_j, j);
    sum += j;
  }
  report.mean_j = sum / static_cast<double>(report.per_response.size());
}

double KlForReport(const Eigen::MatrixXd& channel, const Preferences& p,
                   int s) {
  if (!(p[s] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const int sensitive[] = {s};
  return KlJeopardy(channel, p, sensitive).bits;
}

}  // namespace

double Entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) h -= XLog2X(x);
  return h;
}

double Entropy(const Preferences& p) {
  return Entropy(std::span<const double>(p.p().data(), p.p().size()));
}

Eigen::MatrixXd ResponseChannel(const SurveyDesign& design) {
  return Stack(design).matrix;
}

std::vector<std::string> ResponseLabels(const PairDesign& design,
                                        const Preferences& p) {
  CheckDesignedFor(p, design.n_parties());
  std::vector<std::string> out;
  for (const auto& [i, j] : design.pairs()) {
    out.push_back("{" + p.labels()[i] + "," + p.labels()[j] + "}");
  }
  return out;
}

std::vector<std::string> ResponseLabels(const ListDesign& design) {
  std::vector<std::string> out;
  for (int l = 0; l < design.num_lists(); ++l) {
    out.push_back("L" + std::to_string(l + 1) + "+");
    out.push_back("L" + std::to_string(l + 1) + "-");
  }
  return out;
}

PrivacyReport PairPrivacy(const Preferences& p, std::optional<int> designated) {
  const int n = p.size();
  if (n < 3) throw Error(ErrorCode::kTooFewParties, "pair method needs N >= 3");
  const double nm1 = n - 1.0;

  PrivacyReport report;
  report.h_t = Entropy(p);
  // Ordered (i, j), i != j: T = i with partner j.
  for (int i = 0; i < n; ++i) {
    if (!(p[i] > 0.0)) continue;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double pair = p[i] + p[j];
      report.i_tr -= p[i] / nm1 * std::log2(pair);
      report.h_t_given_r -= p[i] / nm1 * std::log2(p[i] / pair);
    }
  }

  if (designated) {
    CheckParty(p, *designated);
    report.designated_party = designated;
  }
  const int s = designated.value_or(-1);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      ResponseDetail d;
      d.label = "{" + p.labels()[i] + "," + p.labels()[j] + "}";
      d.probability = (p[i] + p[j]) / nm1;
      if ((s == i || s == j) && p[i] + p[j] > 0.0) {
        d.designated_posterior = p[s] / (p[i] + p[j]);
      }
      report.h_r -= XLog2X(d.probability);
      report.detail.push_back(std::move(d));
    }
  }

  if (designated) {
    if (!(p[s] > 0.0)) {
      throw Error(ErrorCode::kZeroProbabilityParty,
                  "party " + p.labels()[s] + " has zero support");
    }
    double min_other = kInf;
    for (int j = 0; j < n; ++j) {
      if (j != s) min_other = std::min(min_other, p[j]);
    }
    report.worst_case_retained = WorstCase(p[s], min_other);
  }
  return report;
}

PrivacyReport ListPrivacy(const Preferences& p, const ListDesign& design,
                          std::optional<int> designated) {
  CheckDesignedFor(p, design.n_parties());
  if (designated) CheckParty(p, *designated);
  const int s = designated.value_or(-1);

  PrivacyReport report;
  report.h_t = Entropy(p);
  report.designated_party = designated;
  double min_companions = kInf;
  for (int l = 0; l < design.num_lists(); ++l) {
    const double alpha = design.weights()[l];
    const std::vector<int> sides[2] = {design.lists()[l], design.Complement(l)};
    for (int side = 0; side < 2; ++side) {
      const std::vector<int>& members = sides[side];
      const double mass = SumOver(p, members);
      report.i_tr -= alpha * XLog2X(mass);
      for (int i : members) {
        if (p[i] > 0.0) report.h_t_given_r -= p[i] * alpha * std::log2(p[i] / mass);
      }
      ResponseDetail d;
      d.label = "L" + std::to_string(l + 1) + (side == 0 ? "+" : "-");
      d.probability = alpha * mass;
      const bool has_s =
          s >= 0 && std::find(members.begin(), members.end(), s) != members.end();
      if (has_s) {
        if (mass > 0.0) d.designated_posterior = p[s] / mass;
        min_companions = std::min(min_companions, SumOverExcept(p, members, s));
      }
      report.h_r -= XLog2X(d.probability);
      report.detail.push_back(std::move(d));
    }
  }

  if (designated) {
    if (!(p[s] > 0.0)) {
      throw Error(ErrorCode::kZeroProbabilityParty,
                  "party " + p.labels()[s] + " has zero support");
    }
    report.worst_case_retained = WorstCase(p[s], min_companions);
  }
  return report;
}

JeopardyReport PairJeopardy(const Preferences& p, int sensitive) {
  const int n = p.size();
  if (n < 3) throw Error(ErrorCode::kTooFewParties, "pair method needs N >= 3");
  CheckSensitive(p, sensitive);
  const PairDesign design = BuildPairDesign(n);

  JeopardyReport report;
  report.sensitive = {sensitive};
  report.response_labels = ResponseLabels(design, p);
  const double rest = 1.0 - p[sensitive];
  for (const auto& [i, j] : design.pairs()) {
    if (i != sensitive && j != sensitive) {
      report.per_response.push_back(0.0);
      continue;
    }
    const int other = i == sensitive ? j : i;
    report.per_response.push_back(p[other] > 0.0 ? rest / p[other] : kInf);
  }
  Finish(report);
  report.kl_j = KlForReport(ResponseChannel(design.survey()), p, sensitive);
  return report;
}

JeopardyReport ListJeopardy(const Preferences& p, const ListDesign& design,
                            int sensitive) {
  CheckDesignedFor(p, design.n_parties());
  CheckSensitive(p, sensitive);

  JeopardyReport report;
  report.sensitive = {sensitive};
  report.response_labels = ResponseLabels(design);
  const double rest = 1.0 - p[sensitive];
  for (int l = 0; l < design.num_lists(); ++l) {
    const std::vector<int> sides[2] = {design.lists()[l], design.Complement(l)};
    for (const std::vector<int>& members : sides) {
      if (std::find(members.begin(), members.end(), sensitive) == members.end()) {
        report.per_response.push_back(0.0);
        continue;
      }
      const double companions = SumOverExcept(p, members, sensitive);
      report.per_response.push_back(companions > 0.0 ? rest / companions : kInf);
    }
  }
  Finish(report);
  report.kl_j = KlForReport(ResponseChannel(design.survey()), p, sensitive);
  return report;
}

KlJeopardyResult KlJeopardy(const Eigen::MatrixXd& channel,
                            const Preferences& p,
                            std::span<const int> sensitive) {
  if (sensitive.empty()) {
    throw Error(ErrorCode::kEmptySensitiveSet, "sensitive set is empty");
  }
  if (channel.cols() != p.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "channel and preferences disagree on the number of parties");
  }
  std::vector<bool> in_s(p.size(), false);
  for (int s : sensitive) {
    CheckParty(p, s);
    in_s[s] = true;
  }
  double mass_s = 0.0;
  double mass_c = 0.0;
  for (int t = 0; t < p.size(); ++t) (in_s[t] ? mass_s : mass_c) += p[t];
  if (!(mass_s > 0.0) || !(mass_c > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "P(T in S) must lie strictly between 0 and 1");
  }

  KlJeopardyResult result;
  for (Eigen::Index r = 0; r < channel.rows(); ++r) {
    double given_s = 0.0;
    double given_c = 0.0;
    for (int t = 0; t < p.size(); ++t) {
      (in_s[t] ? given_s : given_c) += p[t] * channel(r, t);
    }
    given_s /= mass_s;
    given_c /= mass_c;
    if (!(given_s > 0.0)) continue;
    if (!(given_c > 0.0)) {
      result.violating_responses.push_back(static_cast<int>(r));
      continue;
    }
    result.bits += given_s * std::log2(given_s / given_c);
  }
  if (!result.violating_responses.empty()) result.bits = kInf;
  return result;
}

KlJeopardyResult KlJeopardy(const PairDesign& design, const Preferences& p,
                            std::span<const int> sensitive) {
  return KlJeopardy(ResponseChannel(design.survey()), p, sensitive);
}

KlJeopardyResult KlJeopardy(const ListDesign& design, const Preferences& p,
                            std::span<const int> sensitive) {
  return KlJeopardy(ResponseChannel(design.survey()), p, sensitive);
}

}  // namespace anonpoll
