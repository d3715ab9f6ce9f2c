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

#include "anonpoll/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "anonpoll/error.hpp"
#include "anonpoll/normal.hpp"

namespace anonpoll {
namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void ParallelFor(int64_t count, int threads,
                 const std::function<void(int64_t, int64_t)>& body) {
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = static_cast<int>(std::clamp<int64_t>(workers, 1, std::max<int64_t>(count, 1)));
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  const int64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int64_t begin = w * chunk;
    const int64_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(body, begin, end);
  }
  for (auto& t : pool) t.join();
}

// Pairwise summation of a contiguous range.
double PairwiseSum(const double* x, int64_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const int64_t half = n / 2;
  return PairwiseSum(x, half) + PairwiseSum(x + half, n - half);
}

void CheckAllocations(const SurveyDesign& design,
                      std::span<const int64_t> allocations) {
  if (allocations.size() != design.blocks().size()) {
    throw Error(ErrorCode::kLengthMismatch, "need one allocation per block");
  }
  for (int64_t a : allocations) {
    if (a < 0) throw Error(ErrorCode::kInvalidArgument, "negative allocation");
  }
}

// Per-block, per-party response samplers built once for repeated draws.
class DesignSimulator {
 public:
  DesignSimulator(const SurveyDesign& design, const Preferences& p)
      : design_(design),
        choice_(std::span<const double>(p.p().data(), p.p().size())) {
    if (p.size() != design.n_parties()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "preferences and design disagree on the number of parties");
    }
    for (const DesignBlock& b : design.blocks()) {
      std::vector<CategoricalSampler> columns;
      for (Eigen::Index t = 0; t < b.matrix.cols(); ++t) {
        Eigen::VectorXd col = b.matrix.col(t);
        columns.emplace_back(std::span<const double>(col.data(), col.size()));
      }
      responses_.push_back(std::move(columns));
    }
  }

  ResponseCounts Run(std::span<const int64_t> allocations,
                     CounterRng& rng) const {
    ResponseCounts counts;
    for (size_t i = 0; i < allocations.size(); ++i) {
      const DesignBlock& b = design_.blocks()[i];
      std::vector<int64_t> x(b.matrix.rows(), 0);
      for (int64_t r = 0; r < allocations[i]; ++r) {
        const int t = choice_.Sample(rng);
        ++x[responses_[i][t].Sample(rng)];
      }
      counts.blocks.push_back(std::move(x));
      counts.labels.push_back(b.label);
    }
    return counts;
  }

 private:
  const SurveyDesign& design_;
  CategoricalSampler choice_;
  std::vector<std::vector<CategoricalSampler>> responses_;
};

std::vector<int64_t> Flatten(const ResponseCounts& counts) {
  std::vector<int64_t> flat;
  for (const auto& block : counts.blocks) {
    flat.insert(flat.end(), block.begin(), block.end());
  }
  return flat;
}

// All compositions of n into k non-negative parts, lexicographic order.
template <typename Fn>
void ForEachComposition(int64_t n, int k, Fn&& fn) {
  std::vector<int64_t> x(k, 0);
  x[k - 1] = n;
  // Lexicographic increasing: start at (0, ..., 0, n), end at (n, 0, ..., 0).
  while (true) {
    fn(x);
    // Find the rightmost position j < k-1 that can be incremented: the
    // suffix after j must hold a positive amount.
    int j = k - 2;
    while (j >= 0) {
      int64_t suffix = 0;
      for (int t = j + 1; t < k; ++t) suffix += x[t];
      if (suffix > 0) break;
      --j;
    }
    if (j < 0) return;
    int64_t suffix = 0;
    for (int t = j + 1; t < k; ++t) suffix += x[t];
    ++x[j];
    for (int t = j + 1; t < k; ++t) x[t] = 0;
    x[k - 1] = suffix - 1;
  }
}

double LogChoose(int64_t n, int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

CounterRng::CounterRng(uint64_t seed, uint64_t stream)
    : key_(Mix64(seed ^ Mix64(stream * kGolden + 0x632be59bd9b4e019ULL))) {}

uint64_t CounterRng::NextU64() { return Mix64(key_ + (++counter_) * kGolden); }

double CounterRng::NextDouble() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

uint64_t CounterRng::UniformInt(uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "empty range");
  // Lemire's multiply-and-reject method.
  uint64_t x = NextU64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<uint64_t>(m);
  if (low < bound) {
    const uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = NextU64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

CategoricalSampler::CategoricalSampler(std::span<const double> weights) {
  double total = 0.0;
  for (size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "negative sampling weight");
    }
    total += weights[k];
    cumulative_.push_back(total);
    if (weights[k] > 0.0) last_positive_ = static_cast<int>(k);
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "all sampling weights are zero");
  }
  for (double& c : cumulative_) c /= total;
}

int CategoricalSampler::Sample(CounterRng& rng) const {
  const double u = rng.NextDouble();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return last_positive_;
  return static_cast<int>(it - cumulative_.begin());
}

std::vector<int64_t> EqualAllocation(int64_t n, int blocks) {
  if (blocks <= 0) throw Error(ErrorCode::kInvalidArgument, "no blocks");
  std::vector<int64_t> out(blocks, n / blocks);
  for (int64_t i = 0; i < n % blocks; ++i) ++out[i];
  return out;
}

ResponseCounts SimulatePair(const Preferences& p, int64_t n, CounterRng& rng) {
  const int np = p.size();
  if (np < 3) throw Error(ErrorCode::kTooFewParties, "pair method needs N >= 3");
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  const CategoricalSampler choice(
      std::span<const double>(p.p().data(), p.p().size()));
  std::vector<int64_t> x(static_cast<size_t>(np) * (np - 1) / 2, 0);
  for (int64_t r = 0; r < n; ++r) {
    const int t = choice.Sample(rng);
    int partner = static_cast<int>(rng.UniformInt(np - 1));
    if (partner >= t) ++partner;
    const int i = std::min(t, partner);
    const int j = std::max(t, partner);
    ++x[i * (2 * np - i - 1) / 2 + (j - i - 1)];
  }
  ResponseCounts counts;
  counts.blocks.push_back(std::move(x));
  counts.labels.push_back("pairs");
  return counts;
}

ResponseCounts SimulatePair(const Preferences& p, int64_t n, uint64_t seed) {
  CounterRng rng(seed);
  return SimulatePair(p, n, rng);
}

ResponseCounts SimulateList(const ListDesign& design, const Preferences& p,
                            std::span<const int64_t> allocations,
                            CounterRng& rng) {
  if (p.size() != design.n_parties()) {
    throw Error(ErrorCode::kLengthMismatch,
                "preferences and design disagree on the number of parties");
  }
  CheckAllocations(design.survey(), allocations);
  const CategoricalSampler choice(
      std::span<const double>(p.p().data(), p.p().size()));
  ResponseCounts counts;
  for (int l = 0; l < design.num_lists(); ++l) {
    int64_t yes = 0;
    for (int64_t r = 0; r < allocations[l]; ++r) {
      if (design.OnList(l, choice.Sample(rng))) ++yes;
    }
    counts.blocks.push_back({yes, allocations[l] - yes});
    counts.labels.push_back("L" + std::to_string(l + 1));
  }
  return counts;
}

ResponseCounts SimulateList(const ListDesign& design, const Preferences& p,
                            std::span<const int64_t> allocations,
                            uint64_t seed) {
  CounterRng rng(seed);
  return SimulateList(design, p, allocations, rng);
}

ResponseCounts SimulateDesign(const SurveyDesign& design, const Preferences& p,
                              std::span<const int64_t> allocations,
                              CounterRng& rng) {
  CheckAllocations(design, allocations);
  return DesignSimulator(design, p).Run(allocations, rng);
}

Eigen::MatrixXd SimulateEstimates(const SimulationConfig& config) {
  const SurveyDesign& design = config.design;
  CheckAllocations(design, config.allocations);
  if (config.replications < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one replication");
  }
  const LinearEstimator estimator(design, config.allocations);
  const DesignSimulator simulator(design, config.p_true);
  const bool pair = design.kind() == DesignKind::kPair;

  Eigen::MatrixXd out(config.replications, design.n_parties());
  ParallelFor(config.replications, config.threads,
              [&](int64_t begin, int64_t end) {
                for (int64_t r = begin; r < end; ++r) {
                  CounterRng rng(config.seed, static_cast<uint64_t>(r));
                  const ResponseCounts counts =
                      pair ? SimulatePair(config.p_true, config.allocations[0], rng)
                           : simulator.Run(config.allocations, rng);
                  out.row(r) = estimator.Apply(Flatten(counts)).transpose();
                }
              });
  return out;
}

MonteCarloSummary MonteCarloStudy(const SimulationConfig& config) {
  const Eigen::MatrixXd est = SimulateEstimates(config);
  const int64_t r = est.rows();
  const Eigen::Index np = est.cols();
  const double dr = static_cast<double>(r);

  MonteCarloSummary s;
  s.replications = r;
  s.analytic_cov = DesignCovariance(config.design, config.p_true,
                                    config.allocations);
  s.mean.resize(np);
  for (Eigen::Index i = 0; i < np; ++i) {
    s.mean[i] = PairwiseSum(est.col(i).data(), r) / dr;
  }
  const Eigen::MatrixXd centered = est.rowwise() - s.mean.transpose();

  // The mean's standard error uses the analytic variance so it is defined
  // for R = 1 too.
  s.mean_se = (s.analytic_cov.diagonal() / dr).cwiseSqrt();
  for (Eigen::Index i = 0; i < np; ++i) {
    if (s.mean_se[i] > 0.0) {
      s.max_mean_deviation_se =
          std::max(s.max_mean_deviation_se,
                   std::abs(s.mean[i] - config.p_true[static_cast<int>(i)]) /
                       s.mean_se[i]);
    }
  }
  if (r < 2) return s;

  Eigen::MatrixXd cov(np, np);
  Eigen::MatrixXd cov_se(np, np);
  std::vector<double> prod(r);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < np; ++i) {
    for (Eigen::Index j = i; j < np; ++j) {
      for (int64_t k = 0; k < r; ++k) prod[k] = centered(k, i) * centered(k, j);
      const double m = PairwiseSum(prod.data(), r) / dr;
      double spread = 0.0;
      for (int64_t k = 0; k < r; ++k) spread += (prod[k] - m) * (prod[k] - m);
      const double c = m * dr / (dr - 1.0);
      const double se = std::sqrt(spread / (dr - 1.0) / dr);
      cov(i, j) = cov(j, i) = c;
      cov_se(i, j) = cov_se(j, i) = se;
      if (se > 0.0) {
        worst = std::max(worst, std::abs(c - s.analytic_cov(i, j)) / se);
      }
    }
  }
  s.cov = cov;
  s.cov_se = cov_se;
  s.max_cov_deviation_se = worst;

  if (r >= 4) {
    Eigen::VectorXd skew(np);
    Eigen::VectorXd kurt(np);
    for (Eigen::Index i = 0; i < np; ++i) {
      const Eigen::ArrayXd c = centered.col(i).array();
      const double m2 = c.square().mean();
      const double m3 = c.cube().mean();
      const double m4 = c.square().square().mean();
      skew[i] = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
      kurt[i] = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    }
    s.skewness = skew;
    s.excess_kurtosis = kurt;
  }
  return s;
}

BiasTestSummary SimulateBiasTest(const BiasTestConfig& config) {
  const Preferences& p = config.p_true;
  const int party = config.party;
  if (party < 0 || party >= p.size()) {
    throw Error(ErrorCode::kInvalidArgument, "party index out of range");
  }
  if (config.replications < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one replication");
  }
  if (config.n_method < 1 || config.n_binomial < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "both surveys need at least one respondent");
  }
  const double p_i = p[party];
  const double reported = p_i - config.bias;
  if (config.bias < 0.0 || reported < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "bias outside [0, p_i]");
  }

  std::optional<LinearEstimator> list_estimator;
  std::vector<int64_t> list_alloc;
  double var_method = 0.0;  // of p_hat_i for the whole anonymised survey
  switch (config.method.kind) {
    case Method::kPair:
      var_method = PairCovariance(p, static_cast<double>(config.n_method))(party, party);
      break;
    case Method::kList: {
      if (!config.method.design) {
        throw Error(ErrorCode::kInvalidArgument, "list method needs a design");
      }
      const ListDesign& d = *config.method.design;
      list_alloc = EqualAllocation(config.n_method, d.num_lists());
      list_estimator.emplace(d.survey(), list_alloc);
      var_method = ListCovariance(d, p, config.n_method, list_alloc)(party, party);
      break;
    }
    case Method::kBinomial:
      throw Error(ErrorCode::kInvalidArgument,
                  "the anonymised arm must be the pair or list method");
  }
  const double null_sd = std::sqrt(
      var_method + BinomialVariance(p_i) / static_cast<double>(config.n_binomial));
  if (!(null_sd > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "test statistic has zero variance");
  }
  const double z = NormalQuantile(1.0 - config.gamma);

  std::vector<char> reject(config.replications, 0);
  ParallelFor(config.replications, config.threads, [&](int64_t begin, int64_t end) {
    for (int64_t r = begin; r < end; ++r) {
      CounterRng rng(config.seed, static_cast<uint64_t>(r));
      double p_hat = 0.0;
      if (config.method.kind == Method::kPair) {
        const ResponseCounts c = SimulatePair(p, config.n_method, rng);
        p_hat = PairEstimate(p.size(), c.blocks[0], p.p()).p_hat[party];
      } else {
        const ResponseCounts c =
            SimulateList(*config.method.design, p, list_alloc, rng);
        p_hat = list_estimator->Apply(Flatten(c))[party];
      }
      int64_t named = 0;
      for (int64_t k = 0; k < config.n_binomial; ++k) {
        if (rng.NextDouble() < reported) ++named;
      }
      const double p_tilde =
          static_cast<double>(named) / static_cast<double>(config.n_binomial);
      reject[r] = (p_hat - p_tilde) / null_sd > z ? 1 : 0;
    }
  });

  BiasTestSummary s;
  s.replications = config.replications;
  int64_t hits = 0;
  for (char c : reject) hits += c;
  s.rejection_rate = static_cast<double>(hits) / static_cast<double>(config.replications);
  s.mc_se = std::sqrt(s.rejection_rate * (1.0 - s.rejection_rate) /
                      static_cast<double>(config.replications));
  const double per_sample_method = var_method * static_cast<double>(config.n_method);
  s.analytic_power = PowerAt(config.bias, per_sample_method, config.n_method,
                             BinomialVariance(reported), config.n_binomial,
                             config.gamma);
  return s;
}

ExactLaw ExactOracle(const SurveyDesign& design, const Preferences& p,
                     std::span<const int64_t> allocations) {
  CheckAllocations(design, allocations);
  if (p.size() != design.n_parties()) {
    throw Error(ErrorCode::kLengthMismatch,
                "preferences and design disagree on the number of parties");
  }
  double outcomes = 1.0;
  for (size_t i = 0; i < allocations.size(); ++i) {
    const int64_t k = design.blocks()[i].matrix.rows();
    outcomes *= std::exp(LogChoose(allocations[i] + k - 1, k - 1));
    if (outcomes > static_cast<double>(kMaxExactOutcomes) + 0.5) {
      throw Error(ErrorCode::kTooLarge,
                  "more than 10^6 count configurations to enumerate");
    }
  }

  const LinearEstimator estimator(design, allocations);
  const Eigen::MatrixXd& pinv = estimator.pseudo_inverse();
  const Eigen::Index np = design.n_parties();

  // Per block: probability and p_hat contribution of every outcome.
  struct BlockLaw {
    std::vector<double> prob;
    std::vector<Eigen::VectorXd> contribution;
  };
  std::vector<BlockLaw> laws;
  Eigen::Index col = 0;
  for (size_t i = 0; i < allocations.size(); ++i) {
    const Eigen::MatrixXd& a = design.blocks()[i].matrix;
    const Eigen::VectorXd u = a * p.p();
    const int k = static_cast<int>(a.rows());
    const int64_t n = allocations[i];
    BlockLaw law;
    ForEachComposition(n, k, [&](const std::vector<int64_t>& x) {
      double log_prob = std::lgamma(static_cast<double>(n) + 1.0);
      bool possible = true;
      Eigen::VectorXd contrib = Eigen::VectorXd::Zero(np);
      for (int t = 0; t < k; ++t) {
        if (x[t] == 0) continue;
        if (!(u[t] > 0.0)) {
          possible = false;
          break;
        }
        log_prob += static_cast<double>(x[t]) * std::log(u[t]) -
                    std::lgamma(static_cast<double>(x[t]) + 1.0);
        contrib += static_cast<double>(x[t]) * pinv.col(col + t);
      }
      law.prob.push_back(possible ? std::exp(log_prob) : 0.0);
      law.contribution.push_back(std::move(contrib));
    });
    col += k;
    laws.push_back(std::move(law));
  }

  // Mixed-radix walk over the product of block outcomes.
  auto walk = [&](const std::function<void(double, const Eigen::VectorXd&)>& fn) {
    std::vector<size_t> digit(laws.size(), 0);
    while (true) {
      double prob = 1.0;
      Eigen::VectorXd est = Eigen::VectorXd::Zero(np);
      for (size_t i = 0; i < laws.size(); ++i) {
        prob *= laws[i].prob[digit[i]];
        est += laws[i].contribution[digit[i]];
      }
      fn(prob, est);
      size_t i = 0;
      while (i < laws.size() && ++digit[i] == laws[i].prob.size()) {
        digit[i] = 0;
        ++i;
      }
      if (i == laws.size()) return;
    }
  };

  ExactLaw law;
  law.mean = Eigen::VectorXd::Zero(np);
  walk([&](double prob, const Eigen::VectorXd& est) {
    law.mean += prob * est;
    law.total_probability += prob;
    ++law.outcomes;
  });
  law.cov = Eigen::MatrixXd::Zero(np, np);
  walk([&](double prob, const Eigen::VectorXd& est) {
    const Eigen::VectorXd d = est - law.mean;
    law.cov += prob * d * d.transpose();
  });
  return law;
}

}  // namespace anonpoll
