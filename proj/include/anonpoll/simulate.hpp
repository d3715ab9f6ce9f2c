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

// Synthetic survey responses, Monte Carlo studies and exact enumeration of
// the estimator's law for small instances.

#ifndef ANONPOLL_SIMULATE_H_
#define ANONPOLL_SIMULATE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "anonpoll/design.hpp"
#include "anonpoll/estimate.hpp"
#include "anonpoll/power.hpp"

namespace anonpoll {

// Counter-based generator: output k of stream s under seed is a fixed hash
// of (seed, s, k), so replication r can use stream r and reproduce the same
// numbers whatever the thread layout.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0);

  uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double NextDouble();
  // Uniform on {0, ..., bound - 1}; bound > 0.
  uint64_t UniformInt(uint64_t bound);

  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

// Inverse-CDF sampler over a finite distribution. Categories with zero
// weight are never drawn.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::span<const double> weights);
  int Sample(CounterRng& rng) const;

 private:
  std::vector<double> cumulative_;
  int last_positive_ = 0;
};

// n_i as equal as possible, the first n % blocks blocks get one extra.
std::vector<int64_t> EqualAllocation(int64_t n, int blocks);

// Each respondent draws T ~ p and a partner uniformly among the other N - 1
// parties; the unordered pair is counted in lexicographic position.
ResponseCounts SimulatePair(const Preferences& p, int64_t n, CounterRng& rng);
ResponseCounts SimulatePair(const Preferences& p, int64_t n, uint64_t seed);

// n_l respondents are shown list l and answer yes iff T is on it.
ResponseCounts SimulateList(const ListDesign& design, const Preferences& p,
                            std::span<const int64_t> allocations,
                            CounterRng& rng);
ResponseCounts SimulateList(const ListDesign& design, const Preferences& p,
                            std::span<const int64_t> allocations,
                            uint64_t seed);

// Any design: T ~ p, then the response is drawn from column T of A_i.
ResponseCounts SimulateDesign(const SurveyDesign& design, const Preferences& p,
                              std::span<const int64_t> allocations,
                              CounterRng& rng);

struct SimulationConfig {
  Preferences p_true;
  SurveyDesign design;
  std::vector<int64_t> allocations;
  int64_t replications = 1;
  uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
};

struct MonteCarloSummary {
  int64_t replications = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd mean_se;
  Eigen::MatrixXd analytic_cov;  // exact covariance at p_true
  double max_mean_deviation_se = 0.0;
  // Covariance summaries need R >= 2; unset otherwise.
  std::optional<Eigen::MatrixXd> cov;
  std::optional<Eigen::MatrixXd> cov_se;
  std::optional<double> max_cov_deviation_se;
  // Sample skewness and excess kurtosis of each component (R >= 4).
  std::optional<Eigen::VectorXd> skewness;
  std::optional<Eigen::VectorXd> excess_kurtosis;
};

MonteCarloSummary MonteCarloStudy(const SimulationConfig& config);

// Per-replication estimates (R x N), in replication order.
Eigen::MatrixXd SimulateEstimates(const SimulationConfig& config);

// Full two-survey experiment: an anonymised poll of n_method truthful
// respondents and a direct poll of n_binomial respondents reporting the party
// with probability p_i - bias. The one-sided test uses the null variances at
// p_true.
struct BiasTestConfig {
  Preferences p_true;
  PollMethod method;
  int party = 0;
  int64_t n_method = 0;
  int64_t n_binomial = 0;
  double bias = 0.0;
  double gamma = 0.05;
  int64_t replications = 1;
  uint64_t seed = 0;
  int threads = 0;
};

struct BiasTestSummary {
  int64_t replications = 0;
  double rejection_rate = 0.0;
  double mc_se = 0.0;
  double analytic_power = 0.0;
};

BiasTestSummary SimulateBiasTest(const BiasTestConfig& config);

struct ExactLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  int64_t outcomes = 0;
  double total_probability = 0.0;
};

inline constexpr int64_t kMaxExactOutcomes = 1'000'000;

// Enumerates every count configuration (compositions in lexicographic
// order, probabilities in log space) and returns the exact mean and
// covariance of p_hat. Throws TooLarge beyond kMaxExactOutcomes.
ExactLaw ExactOracle(const SurveyDesign& design, const Preferences& p,
                     std::span<const int64_t> allocations);

}  // namespace anonpoll

#endif  // ANONPOLL_SIMULATE_H_
