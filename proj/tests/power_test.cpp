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

#include <gtest/gtest.h>

#include "anonpoll/design.hpp"
#include "anonpoll/error.hpp"
#include "anonpoll/io.hpp"
#include "oracle.hpp"

namespace anonpoll {
namespace {

const Preferences& Sweden() {
  static const Preferences p = BuiltinScenario("sweden2014").preferences;
  return p;
}

PollMethod List10() { return PollMethod::List(BuildBalancedListDesign(10)); }

std::vector<double> Grid(double step, double max) {
  std::vector<double> g;
  for (int k = 0; k * step <= max + 1e-12; ++k) g.push_back(k * step);
  return g;
}

// Smallest grid bias reaching the target power.
double BiasForPower(const PowerResult& r, double target) {
  for (size_t k = 0; k < r.power.size(); ++k) {
    if (r.power[k] >= target) return r.bias[k];
  }
  return std::numeric_limits<double>::infinity();
}

TEST(PowerTest, NullGivesGamma) {
  for (double gamma : {0.01, 0.05, 0.1}) {
    EXPECT_NEAR(PowerAt(0.0, 0.3, 100, 0.2, 100, gamma), gamma, 1e-9);
  }
  const PowerResult r =
      PowerCurve({Sweden(), 0, {0.0}, 8758, 6242, 0.05, PollMethod::Pair()});
  EXPECT_NEAR(r.power[0], 0.05, 1e-9);
}

TEST(PowerTest, MatchesScalarReimplementation) {
  const Preferences u = Preferences::Uniform(10);
  const auto grid = Grid(0.001, 0.1);
  for (const PollMethod& m : {PollMethod::Pair(), List10()}) {
    const PowerResult r = PowerCurve({u, 0, grid, 13500, 1500, 0.05, m});
    const double vm = m.kind == Method::kPair
                          ? (1 + 7 * 0.1) / 8 - 0.01
                          : 0.81;
    for (size_t k = 0; k < grid.size(); ++k) {
      const double b = grid[k];
      EXPECT_NEAR(r.power[k],
                  oracle::Power(b, vm, 13500, (0.1 - b) * (0.9 + b), 1500, 0.05),
                  1e-9);
    }
  }
}

TEST(PowerTest, MonotoneInBiasAndSampleSize) {
  const auto grid = Grid(0.0005, 0.1);
  const PowerResult r = PowerCurve({Sweden(), 0, grid, 10781, 4219, 0.05, List10()});
  for (size_t k = 1; k < grid.size(); ++k) {
    EXPECT_GE(r.power[k], r.power[k - 1]);
    if (r.power[k] < 1.0 - 1e-9) EXPECT_GT(r.power[k], r.power[k - 1]);
  }
  double last = 0.0;
  for (int64_t scale = 1; scale <= 8; ++scale) {
    const double pw = PowerAt(0.01, 0.5, 600 * scale, 0.1, 400 * scale, 0.05);
    EXPECT_GT(pw, last);
    last = pw;
  }
}

TEST(PowerTest, SwedishNinetyPercentBias) {
  const double vb = BinomialVariance(0.129);
  const auto grid = Grid(0.0001, 0.05);
  const Allocation ap =
      OptimalAllocation(15000, PerSampleVariance(PollMethod::Pair(), Sweden(), 0), vb);
  const Allocation al = OptimalAllocation(15000, PerSampleVariance(List10(), Sweden(), 0), vb);
  const double b_pair = BiasForPower(
      PowerCurve({Sweden(), 0, grid, ap.n_method, ap.n_binomial, 0.05, PollMethod::Pair()}),
      0.9);
  const double b_list = BiasForPower(
      PowerCurve({Sweden(), 0, grid, al.n_method, al.n_binomial, 0.05, List10()}), 0.9);
  EXPECT_LT(b_pair, 0.02);
  EXPECT_GT(b_pair, 0.017);
  EXPECT_NEAR(b_list, 0.03, 0.003);
}

TEST(PowerTest, Errors) {
  EXPECT_THROW(PowerAt(0.01, 0.0, 10, 0.0, 10, 0.05), Error);
  try {
    PowerAt(0.01, 0.0, 10, 0.0, 10, 0.05);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVariance);
  }
  EXPECT_THROW(PowerCurve({Sweden(), 9, {0.02}, 100, 100, 0.05, PollMethod::Pair()}),
               Error);
  EXPECT_THROW(PowerCurve({Sweden(), 0, {-0.01}, 100, 100, 0.05, PollMethod::Pair()}),
               Error);
  EXPECT_THROW(PowerAt(0.0, 0.3, 100, 0.2, 100, 1.0), Error);
}

TEST(AllocationTest, CaptionValues) {
  const Preferences u = Preferences::Uniform(10);
  const double vb_u = BinomialVariance(0.1);
  EXPECT_EQ(OptimalAllocation(15000, PerSampleVariance(List10(), u, 0), vb_u).n_method,
            11250);
  EXPECT_EQ(OptimalAllocation(15000, PerSampleVariance(PollMethod::Pair(), u, 0), vb_u)
                .n_method,
            9000);
  const double vb_s = BinomialVariance(0.129);
  const Allocation list = OptimalAllocation(15000, PerSampleVariance(List10(), Sweden(), 0), vb_s);
  EXPECT_EQ(list.n_method, 10781);
  EXPECT_EQ(list.n_binomial, 15000 - 10781);
  EXPECT_EQ(OptimalAllocation(15000, PerSampleVariance(PollMethod::Pair(), Sweden(), 0), vb_s)
                .n_method,
            8758);
  EXPECT_EQ(OptimalAllocation(1000, 0.3, 0.3).n_method, 500);
}

// The returned split is within one sample of the integer minimiser of the
// null-hypothesis standard deviation, so it maximises the power at every b.
TEST(AllocationTest, DiscreteOptimum) {
  for (auto [vm, vb] : {std::pair{0.81, 0.09}, std::pair{0.7336, 0.1124},
                        std::pair{0.25, 0.25}, std::pair{1.3, 0.01}}) {
    const int64_t n = 15000;
    const Allocation a = OptimalAllocation(n, vm, vb);
    auto sd = [&](int64_t m) { return std::sqrt(vm / m + vb / (n - m)); };
    int64_t best = 1;
    for (int64_t m = 1; m < n; ++m) {
      if (sd(m) < sd(best)) best = m;
    }
    EXPECT_LE(std::abs(best - a.n_method), 1);
    for (double b : {0.005, 0.01, 0.02}) {
      const double at = PowerAt(b, vm, a.n_method, vb, a.n_binomial, 0.05);
      for (int64_t m = 1; m < n; ++m) {
        if (std::abs(m - a.n_method) <= 1) continue;
        EXPECT_LE(PowerAt(b, vm, m, vb, n - m, 0.05), at + 1e-12);
      }
    }
  }
}

TEST(SampleSizeTest, Examples) {
  const Preferences u = Preferences::Uniform(10);
  EXPECT_EQ(SampleSizeForSd(0.01, List10(), u, 0), 8100);
  EXPECT_EQ(SampleSizeForSd(0.0075, List10(), u, 0), 14400);
  const Preferences half(Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(SampleSizeForSd(0.005, PollMethod::Binomial(), half, 0), 10000);
  // 8100 respondents suffice at 1 % for any preferences.
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Preferences p(oracle::RandomP(10, gen));
    EXPECT_LE(SampleSizeForSd(0.01, List10(), p, trial), 8100);
  }
  EXPECT_THROW(SampleSizeForSd(0.0, List10(), u, 0), Error);
}

TEST(SdCurveTest, Properties) {
  std::vector<int64_t> grid;
  for (int64_t n = 1000; n <= 20000; n += 1000) grid.push_back(n);
  const auto sd = SdCurve(List10(), Sweden(), 0, grid);
  EXPECT_NEAR(sd[9].sd_binomial, std::sqrt(0.129 * 0.871 / 1e4), 1e-15);
  EXPECT_NEAR(sd[9].sd_binomial, 0.00335, 5e-6);
  for (int party : {1, 9}) {
    const auto other = SdCurve(List10(), Sweden(), party, grid);
    for (size_t k = 0; k < grid.size(); ++k) {
      EXPECT_NEAR(other[k].sd_method, sd[k].sd_method, 1e-14);
      EXPECT_GT(other[k].sd_pair, other[k].sd_binomial);
    }
  }
}

}  // namespace
}  // namespace anonpoll
