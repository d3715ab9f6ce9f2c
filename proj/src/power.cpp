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

#include "anonpoll/power.hpp"

#include <cmath>

#include "anonpoll/error.hpp"
#include "anonpoll/estimate.hpp"
#include "anonpoll/normal.hpp"

namespace anonpoll {
namespace {

constexpr double kSdSlack = 1e-12;

void CheckParty(const Preferences& p, int party) {
  if (party < 0 || party >= p.size()) {
    throw Error(ErrorCode::kInvalidArgument, "party index out of range");
  }
}

}  // namespace

double BinomialVariance(double p) { return p * (1.0 - p); }

double PerSampleVariance(const PollMethod& method, const Preferences& p,
                         int party) {
  CheckParty(p, party);
  switch (method.kind) {
    case Method::kPair:
      return PairCovariance(p, 1.0)(party, party);
    case Method::kList:
      if (!method.design) {
        throw Error(ErrorCode::kInvalidArgument, "list method needs a design");
      }
      return ListCovariance(*method.design, p, 1.0)(party, party);
    case Method::kBinomial:
      return BinomialVariance(p[party]);
  }
  return 0.0;
}

double PowerAt(double bias, double var_method, int64_t n_method,
               double var_binomial_alt, int64_t n_binomial, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0, 1)");
  }
  if (n_method <= 0 || n_binomial <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "both surveys need at least one respondent");
  }
  const double denom =
      std::sqrt(var_method / static_cast<double>(n_method) +
                var_binomial_alt / static_cast<double>(n_binomial));
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "test statistic has zero variance");
  }
  return 1.0 - NormalCdf(NormalQuantile(1.0 - gamma) - bias / denom);
}

PowerResult PowerCurve(const PowerSpec& spec) {
  CheckParty(spec.p_true, spec.party);
  if (spec.method.kind == Method::kBinomial) {
    throw Error(ErrorCode::kInvalidArgument,
                "the anonymised arm must be the pair or list method");
  }
  const double p_i = spec.p_true[spec.party];
  const double var_method = PerSampleVariance(spec.method, spec.p_true, spec.party);

  PowerResult result;
  result.n_method = spec.n_method;
  result.n_binomial = spec.n_binomial;
  for (double b : spec.bias_grid) {
    if (b < 0.0 || b > p_i) {
      throw Error(ErrorCode::kInvalidArgument, "bias outside [0, p_i]");
    }
    const double var_binom = BinomialVariance(p_i - b);
    result.bias.push_back(b);
    result.power.push_back(PowerAt(b, var_method, spec.n_method, var_binom,
                                   spec.n_binomial, spec.gamma));
    result.denominator.push_back(
        std::sqrt(var_method / static_cast<double>(spec.n_method) +
                  var_binom / static_cast<double>(spec.n_binomial)));
  }
  return result;
}

Allocation OptimalAllocation(int64_t n, double var_method,
                             double var_binomial) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "need n >= 2");
  if (!(var_method > 0.0) || !(var_binomial > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "variances must be positive");
  }
  const double sm = std::sqrt(var_method);
  const double sb = std::sqrt(var_binomial);
  Allocation a;
  a.n_method = std::llround(static_cast<double>(n) * sm / (sm + sb));
  a.n_binomial = n - a.n_method;
  return a;
}

int64_t SampleSizeForSd(double target_sd, const PollMethod& method,
                        const Preferences& p, int party) {
  if (!(target_sd > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target sd must be positive");
  }
  const double var = PerSampleVariance(method, p, party);
  if (var <= 0.0) return 1;
  const double limit = target_sd * (1.0 + kSdSlack);
  auto ok = [&](int64_t n) {
    return std::sqrt(var / static_cast<double>(n)) <= limit;
  };
  auto n = static_cast<int64_t>(std::ceil(var / (target_sd * target_sd)));
  n = std::max<int64_t>(n, 1);
  while (n > 1 && ok(n - 1)) --n;
  while (!ok(n)) ++n;
  return n;
}

std::vector<SdPoint> SdCurve(const PollMethod& method, const Preferences& p,
                             int party, std::span<const int64_t> n_grid) {
  const double v_method = PerSampleVariance(method, p, party);
  const double v_pair = PerSampleVariance(PollMethod::Pair(), p, party);
  const double v_binom = BinomialVariance(p[party]);
  std::vector<SdPoint> out;
  out.reserve(n_grid.size());
  for (int64_t n : n_grid) {
    if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
    const double dn = static_cast<double>(n);
    out.push_back({n, std::sqrt(v_method / dn), std::sqrt(v_pair / dn),
                   std::sqrt(v_binom / dn)});
  }
  return out;
}

}  // namespace anonpoll
