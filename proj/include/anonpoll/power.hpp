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

// Bias-detection power for an anonymised poll run alongside a direct poll.
//
// The direct poll estimates p_i - b_i (respondents under-report party i by
// b_i); the anonymised poll is unbiased. The one-sided test of b_i = 0
// against b_i > 0 based on p_hat_i - p_tilde_i has asymptotic power
//
//   pi(b) = 1 - Phi(z_{1-gamma} - b / sqrt(V_method(p_i) / n_method +
//                                           V_binom(p_i - b) / n_binomial))
//
// where V are per-respondent variances.

#ifndef ANONPOLL_POWER_H_
#define ANONPOLL_POWER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "anonpoll/design.hpp"

namespace anonpoll {

enum class Method { kPair, kList, kBinomial };

// A polling method together with whatever it needs to compute variances.
struct PollMethod {
  Method kind = Method::kPair;
  std::optional<ListDesign> design;  // set for kList

  static PollMethod Pair() { return {Method::kPair, std::nullopt}; }
  static PollMethod List(ListDesign d) { return {Method::kList, std::move(d)}; }
  static PollMethod Binomial() { return {Method::kBinomial, std::nullopt}; }
};

// Variance of the estimate of `party` from a single respondent (n = 1).
double PerSampleVariance(const PollMethod& method, const Preferences& p,
                         int party);

// p (1 - p): per-respondent variance of the direct-poll share.
double BinomialVariance(double p);

struct PowerSpec {
  Preferences p_true;
  int party = 0;
  std::vector<double> bias_grid;
  int64_t n_method = 0;
  int64_t n_binomial = 0;
  double gamma = 0.05;
  PollMethod method;
};

struct PowerResult {
  std::vector<double> bias;
  std::vector<double> power;
  std::vector<double> denominator;  // sd of p_hat - p_tilde at each bias
  int64_t n_method = 0;
  int64_t n_binomial = 0;
};

// Power formula for given per-respondent variances. Throws ZeroVariance.
double PowerAt(double bias, double var_method, int64_t n_method,
               double var_binomial_alt, int64_t n_binomial, double gamma);

PowerResult PowerCurve(const PowerSpec& spec);

struct Allocation {
  int64_t n_method = 0;
  int64_t n_binomial = 0;
};

// n_method = n sqrt(V_m) / (sqrt(V_m) + sqrt(V_b)) rounded to nearest, the
// rest to the direct poll.
Allocation OptimalAllocation(int64_t n, double var_method, double var_binomial);

// Smallest n with sd of the party's estimate <= target_sd (relative slack
// 1e-12 so that exact ratios like 0.81 / 1e-4 are not pushed up by rounding).
int64_t SampleSizeForSd(double target_sd, const PollMethod& method,
                        const Preferences& p, int party);

struct SdPoint {
  int64_t n = 0;
  double sd_method = 0.0;
  double sd_pair = 0.0;
  double sd_binomial = 0.0;
};

std::vector<SdPoint> SdCurve(const PollMethod& method, const Preferences& p,
                             int party, std::span<const int64_t> n_grid);

}  // namespace anonpoll

#endif  // ANONPOLL_POWER_H_
