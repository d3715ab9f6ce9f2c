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

#include <random>

#include <gtest/gtest.h>

#include "anonpoll/design.hpp"
#include "anonpoll/error.hpp"
#include "anonpoll/io.hpp"
#include "oracle.hpp"

namespace anonpoll {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kUsageError;
}

ResponseCounts ListCounts(const std::vector<int64_t>& yes,
                          const std::vector<int64_t>& totals) {
  ResponseCounts c;
  for (size_t l = 0; l < yes.size(); ++l) c.blocks.push_back({yes[l], totals[l] - yes[l]});
  return c;
}

// Closed-form pair covariance written out entry by entry.
Eigen::MatrixXd PairCovarianceOracle(const Eigen::VectorXd& p, double n) {
  const int m = static_cast<int>(p.size());
  Eigen::MatrixXd c(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      c(i, j) = i == j ? ((1 + (m - 3) * p[i]) / (m - 2) - p[i] * p[i]) / n
                       : -((1 - p[i] - p[j]) / ((m - 2.0) * (m - 2.0)) + p[i] * p[j]) / n;
    }
  }
  return c;
}

TEST(EstimateGeneralTest, PairSymmetricCounts) {
  const PairDesign d = BuildPairDesign(3);
  const EstimateResult r = EstimateGeneral(d.survey(), {{{100, 100, 100}}, {}});
  EXPECT_TRUE(r.p_hat.isApprox(Eigen::Vector3d::Constant(1 / 3.0), 1e-12));
  EXPECT_EQ(r.n, 300);
  EXPECT_EQ(r.method, MethodTag::kPair);
}

TEST(EstimateGeneralTest, PairConcentratedGivesNegativeEntries) {
  const PairDesign d = BuildPairDesign(4);
  const EstimateResult r = EstimateGeneral(d.survey(), {{{100, 0, 0, 0, 0, 0}}, {}});
  EXPECT_TRUE(r.p_hat.isApprox(Eigen::Vector4d(1, 1, -0.5, -0.5), 1e-12));
  EXPECT_TRUE(r.negative_entries());
  EXPECT_TRUE(r.possibly_indefinite);
  EXPECT_EQ(r.cov_kind, CovarianceKind::kPlugIn);
}

TEST(EstimateGeneralTest, ListUniformFixedPoint) {
  const ListDesign d = BuildBalancedListDesign(4);
  const EstimateResult r =
      EstimateGeneral(d.survey(), ListCounts({500, 500, 500}, {1000, 1000, 1000}));
  EXPECT_TRUE(r.p_hat.isApprox(Eigen::Vector4d::Constant(0.25), 1e-12));
  EXPECT_EQ(r.method, MethodTag::kList);
  EXPECT_FALSE(r.possibly_indefinite);
}

TEST(EstimateGeneralTest, Errors) {
  const ListDesign d = BuildBalancedListDesign(4);
  EXPECT_EQ(CodeOf([&] { EstimateGeneral(d.survey(), ListCounts({0, 5, 5}, {0, 10, 10})); }),
            ErrorCode::kEmptyBlock);
  EXPECT_EQ(CodeOf([&] { EstimateGeneral(d.survey(), ListCounts({5, 5}, {10, 10})); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(CodeOf([] { PairEstimate(4, std::vector<int64_t>{1, 2, 3}); }),
            ErrorCode::kLengthMismatch);
}

TEST(EstimateGeneralTest, KnownPCovariance) {
  const PairDesign d = BuildPairDesign(5);
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(5, 0.2);
  const EstimateResult r =
      EstimateGeneral(d.survey(), {{{9, 8, 7, 6, 5, 4, 3, 2, 1, 5}}, {}}, p);
  EXPECT_EQ(r.cov_kind, CovarianceKind::kKnownP);
  EXPECT_TRUE(r.cov.isApprox(PairCovarianceOracle(p, 50), 1e-12));
}

TEST(PairEstimateTest, Examples) {
  EXPECT_TRUE(PairEstimate(3, std::vector<int64_t>{1, 1, 0})
                  .p_hat.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  EXPECT_TRUE(PairEstimate(10, std::vector<int64_t>(45, 7))
                  .p_hat.isApprox(Eigen::VectorXd::Constant(10, 0.1), 1e-12));
  std::vector<int64_t> c(6, 0);
  c[0] = 100;
  EXPECT_TRUE(PairEstimate(4, c).p_hat.isApprox(Eigen::Vector4d(1, 1, -0.5, -0.5), 1e-12));
}

TEST(PairEstimateTest, AgreesWithGeneralEstimator) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 8;
    const PairDesign d = BuildPairDesign(n);
    std::uniform_int_distribution<int64_t> u(0, 50);
    std::vector<int64_t> c(d.num_pairs());
    for (auto& x : c) x = u(gen);
    c[0] += 1;
    const EstimateResult a = PairEstimate(n, c);
    const EstimateResult b = EstimateGeneral(d.survey(), {{c}, {}});
    EXPECT_LT((a.p_hat - b.p_hat).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a.cov - b.cov).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(a.p_hat.sum(), 1.0, 1e-9);
    EXPECT_LT(a.cov.rowwise().sum().cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_TRUE(a.cov.isApprox(a.cov.transpose(), 1e-14));
  }
}

TEST(LinearEstimatorTest, MatchesGeneralEstimator) {
  const ListDesign d = BuildBalancedListDesign(6);
  std::vector<int64_t> alloc(d.num_lists(), 40);
  const LinearEstimator est(d.survey(), alloc);
  std::vector<int64_t> yes;
  for (int l = 0; l < d.num_lists(); ++l) yes.push_back(3 * l % 41);
  const ResponseCounts c = ListCounts(yes, alloc);
  EXPECT_LT((est.Apply(c) - EstimateGeneral(d.survey(), c).p_hat).cwiseAbs().maxCoeff(),
            1e-12);
  alloc[0] = 41;
  EXPECT_THROW(est.Apply(ListCounts(yes, alloc)), Error);
}

TEST(PairCovarianceTest, TableValuesAtUniform) {
  const Eigen::MatrixXd c = PairCovariance(Preferences::Uniform(10), 1);
  EXPECT_NEAR(c(0, 0), 0.2025, 1e-12);
  EXPECT_NEAR(c(0, 0), 2.0 / 8.0 * 0.81, 1e-12);
  EXPECT_NEAR(c(0, 1), -0.0225, 1e-12);
  EXPECT_NEAR(c(0, 1), -2.0 / 80.0 * 0.9, 1e-12);
}

TEST(PairCovarianceTest, ExcessVarianceIdentity) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 8;
    const Preferences p(oracle::RandomP(n, gen));
    const double size = 1 + trial * 37;
    const Eigen::MatrixXd c = PairCovariance(p, size);
    EXPECT_TRUE(c.isApprox(PairCovarianceOracle(p.p(), size), 1e-12));
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(c(i, i) - p[i] * (1 - p[i]) / size, (1 - p[i]) / (size * (n - 2)), 1e-14);
      EXPECT_GT(c(i, i), p[i] * (1 - p[i]) / size);
    }
  }
}

TEST(PairCovarianceTest, MatchesGeneralFormula) {
  std::mt19937_64 gen(13);
  for (int n = 3; n <= 10; ++n) {
    const Preferences p(oracle::RandomP(n, gen));
    const PairDesign d = BuildPairDesign(n);
    const std::vector<int64_t> alloc{777};
    EXPECT_LT((DesignCovariance(d.survey(), p, alloc) - PairCovariance(p, 777))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(ListCovarianceTest, TableValuesAtUniform) {
  const ListDesign d = BuildBalancedListDesign(10);
  const Eigen::MatrixXd c = ListCovariance(d, Preferences::Uniform(10), 1.0);
  EXPECT_NEAR(c(3, 3), 0.81, 1e-12);
  EXPECT_NEAR(c(3, 7), -0.09, 1e-12);
}

TEST(ListCovarianceTest, SwedishDiagonalConstant) {
  const ListDesign d = BuildBalancedListDesign(10);
  const Preferences p = BuiltinScenario("sweden2014").preferences;
  const Eigen::MatrixXd c = ListCovariance(d, p, 1.0);
  EXPECT_LT(c.diagonal().maxCoeff() - c.diagonal().minCoeff(), 1e-12);
  // Constant diagonal value from the yes-probabilities of the raw subsets.
  double sum_q = 0.0;
  for (const auto& list : oracle::SubsetsWithZero(10, 5)) {
    double yes = 0.0;
    for (int k : list) yes += p[k];
    sum_q += yes * (1 - yes);
  }
  const double expected = 4.0 / 126.0 * 0.81 * sum_q;
  EXPECT_NEAR(c(0, 0), expected, 1e-12);
  EXPECT_NEAR(c(0, 0), 0.7336314, 1e-7);
}

TEST(ListCovarianceTest, AllocationsMustSum) {
  const ListDesign d = BuildBalancedListDesign(4);
  const std::vector<int64_t> alloc{10, 10, 10};
  EXPECT_NO_THROW(ListCovariance(d, Preferences::Uniform(4), 30, alloc));
  EXPECT_THROW(ListCovariance(d, Preferences::Uniform(4), 31, alloc), Error);
}

TEST(AsymptoticCovarianceTest, PairIsScaledExact) {
  const Preferences p(Eigen::Vector4d(0.4, 0.3, 0.2, 0.1));
  const PairDesign d = BuildPairDesign(4);
  const std::vector<double> a{1.0};
  EXPECT_TRUE(AsymptoticCovariance(d.survey(), p, a)
                  .isApprox(250.0 * PairCovariance(p, 250.0), 1e-12));
}

TEST(AsymptoticCovarianceTest, BalancedFourUniform) {
  const ListDesign d = BuildBalancedListDesign(4);
  const std::vector<double> a(3, 1 / 3.0);
  const Eigen::MatrixXd c = AsymptoticCovariance(d.survey(), Preferences::Uniform(4), a);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(c(i, j), i == j ? 0.5625 : -0.1875, 1e-12);
    }
  }
}

TEST(AsymptoticCovarianceTest, ZeroAlphaRejected) {
  const ListDesign d = BuildBalancedListDesign(4);
  const std::vector<double> a{0.5, 0.5, 0.0};
  EXPECT_EQ(CodeOf([&] { AsymptoticCovariance(d.survey(), Preferences::Uniform(4), a); }),
            ErrorCode::kAlphaNotPositive);
}

TEST(ConfidenceIntervalTest, Examples) {
  EstimateResult r;
  r.p_hat = Eigen::Vector2d(0.3, 0.7);
  r.cov = Eigen::Matrix2d::Zero();
  auto iv = ConfidenceIntervals(r, 0.95);
  EXPECT_EQ(iv[0].lower, 0.3);
  EXPECT_EQ(iv[0].upper, 0.3);
  r.cov(0, 0) = 1e-4;
  iv = ConfidenceIntervals(r, 0.95);
  EXPECT_NEAR((iv[0].upper - iv[0].lower) / 2, 0.0196, 5e-5);
  EXPECT_NEAR((iv[0].upper - iv[0].lower) / 2, oracle::PhiInverse(0.975) * 0.01, 1e-9);

  // Exact at uniform p and an upper bound for every other p.
  const ListDesign d = BuildBalancedListDesign(10);
  EstimateResult list;
  list.p_hat = Eigen::VectorXd::Constant(10, 0.1);
  list.cov = ListCovariance(d, Preferences(list.p_hat), 8000.0);
  for (const Interval& i : ConfidenceIntervals(list, 0.95)) {
    EXPECT_NEAR((i.upper - i.lower) / 2, 0.0197, 1e-4);
    EXPECT_NEAR(i.upper - i.lower, 0.039, 5e-4);
  }
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 10; ++trial) {
    list.p_hat = oracle::RandomP(10, gen);
    list.cov = ListCovariance(d, Preferences(list.p_hat), 8000.0);
    for (const Interval& i : ConfidenceIntervals(list, 0.95)) {
      EXPECT_LE((i.upper - i.lower) / 2, 0.0197225);
    }
  }
}

TEST(ConfidenceIntervalTest, NotClipped) {
  EstimateResult r;
  r.p_hat = Eigen::Vector2d(-0.01, 1.01);
  r.cov = Eigen::Matrix2d::Identity() * 1e-4;
  const auto iv = ConfidenceIntervals(r, 0.9);
  EXPECT_LT(iv[0].lower, 0.0);
  EXPECT_TRUE(iv[0].outside_unit);
  EXPECT_GT(iv[1].upper, 1.0);
  EXPECT_THROW(ConfidenceIntervals(r, 1.0), Error);
}

TEST(ProjectToSimplexTest, Basics) {
  EXPECT_TRUE(ProjectToSimplex(Eigen::Vector4d(1, 1, -0.5, -0.5))
                  .isApprox(Eigen::Vector4d(0.5, 0.5, 0, 0), 1e-12));
  const Eigen::Vector3d inside(0.2, 0.3, 0.5);
  EXPECT_TRUE(ProjectToSimplex(inside).isApprox(inside, 1e-15));
}

// Sum over every multinomial outcome of P(outcome) * p_hat.
TEST(UnbiasednessTest, PairByEnumeration) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 6; ++trial) {
    for (auto [n_parties, n] : {std::pair{3, 5}, std::pair{4, 3}, std::pair{4, 6}}) {
      const std::vector<double> p = oracle::RandomRationalP(n_parties, 20, gen);
      const PairDesign d = BuildPairDesign(n_parties);
      std::vector<double> u;
      for (auto [i, j] : d.pairs()) u.push_back((p[i] + p[j]) / (n_parties - 1));
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_parties);
      oracle::ForEachComposition(n, u, [&](const std::vector<int>& x, double prob) {
        const std::vector<int64_t> c(x.begin(), x.end());
        mean += prob * PairEstimate(n_parties, c).p_hat;
      });
      for (int k = 0; k < n_parties; ++k) EXPECT_NEAR(mean[k], p[k], 1e-12);
    }
  }
}

TEST(UnbiasednessTest, BalancedListByEnumeration) {
  std::mt19937_64 gen(22);
  const ListDesign d = BuildBalancedListDesign(4);
  for (int trial = 0; trial < 6; ++trial) {
    const std::vector<double> p = oracle::RandomRationalP(4, 16, gen);
    for (int nl = 1; nl <= 3; ++nl) {
      const std::vector<int64_t> alloc(3, nl);
      const LinearEstimator est(d.survey(), alloc);
      std::vector<double> yes;
      for (const auto& list : d.lists()) {
        double y = 0.0;
        for (int k : list) y += p[k];
        yes.push_back(y);
      }
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
      for (int a = 0; a <= nl; ++a) {
        for (int b = 0; b <= nl; ++b) {
          for (int c = 0; c <= nl; ++c) {
            const int ks[3] = {a, b, c};
            double prob = 1.0;
            for (int l = 0; l < 3; ++l) {
              prob *= std::tgamma(nl + 1.0) / std::tgamma(ks[l] + 1.0) /
                      std::tgamma(nl - ks[l] + 1.0) * std::pow(yes[l], ks[l]) *
                      std::pow(1 - yes[l], nl - ks[l]);
            }
            mean += prob * est.Apply(ListCounts({a, b, c}, alloc));
          }
        }
      }
      for (int k = 0; k < 4; ++k) EXPECT_NEAR(mean[k], p[k], 1e-12);
    }
  }
}

}  // namespace
}  // namespace anonpoll
