#include <gtest/gtest.h>

#include <vector>

#include "selest/model.hpp"

using namespace selest;

TEST(Reduce, MinimaAndPooledSpread) {
  const std::vector<double> a{3.0, 1.0, 2.0};
  const std::vector<double> b{5.0, 4.5, 6.0};
  const auto t = reduce(a, b);
  EXPECT_EQ(t.x1, 1.0);
  EXPECT_EQ(t.x2, 4.5);
  EXPECT_DOUBLE_EQ(t.s, (2.0 + 1.0) + (0.5 + 1.5));
  EXPECT_EQ(t.n, 3);
  EXPECT_DOUBLE_EQ(t.delta(), 3 * 3.5);
  EXPECT_DOUBLE_EQ(t.w(), 3.5 / 5.0);
}

TEST(Reduce, Rejects) {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.0, 2.0, 3.0};
  const std::vector<double> one{1.0};
  EXPECT_THROW(reduce(a, b), DomainError);
  EXPECT_THROW(reduce(one, one), DomainError);
}

TEST(SufficientStatistic, Validation) {
  EXPECT_THROW(SufficientStatistic(0, 0, -1, 3), DomainError);
  EXPECT_THROW(SufficientStatistic(0, 0, 1, 1), DomainError);
  const SufficientStatistic degenerate(1.0, 2.0, 0.0, 3);
  EXPECT_THROW((void)degenerate.w(), DomainError);
}

TEST(Select, NaturalRuleAndTies) {
  const SufficientStatistic t(2.0, 1.0, 1.0, 3);
  EXPECT_EQ(select(t, Target::Best).selected, 1);
  EXPECT_EQ(select(t, Target::Worst).selected, 2);
  const SufficientStatistic tie(1.0, 1.0, 1.0, 3);
  EXPECT_EQ(select(tie, Target::Best).selected, 1);
  EXPECT_EQ(select(tie, Target::Worst).selected, 1);
}

TEST(Select, RealizedTargetFollowsSelection) {
  const PopulationParams p(0.5, 2.0, 1.0);
  const SufficientStatistic t(0.9, 2.1, 1.0, 4);
  EXPECT_EQ(realized_target(p, select(t, Target::Best)), 2.0);
  EXPECT_EQ(realized_target(p, select(t, Target::Worst)), 0.5);
}

TEST(NormalizedGapTest, SymmetricInLabels) {
  EXPECT_DOUBLE_EQ(normalized_gap(PopulationParams(0, 1, 2), 4).value(), 2.0);
  EXPECT_DOUBLE_EQ(normalized_gap(PopulationParams(1, 0, 2), 4).value(), 2.0);
  EXPECT_THROW(NormalizedGap(-0.1), DomainError);
  EXPECT_THROW(PopulationParams(0, 0, 0), DomainError);
}

TEST(SampleStatistic, Moments) {
  const PopulationParams p(1.0, 3.0, 2.0);
  const int n = 4;
  RngStream root(11);
  const int reps = 100000;
  double m1 = 0, m2 = 0, ms = 0, lo1 = INFINITY, lo2 = INFINITY;
  for (int r = 0; r < reps; ++r) {
    auto s = root.substream(r);
    const auto t = sample_statistic(s, p, n);
    m1 += t.x1;
    m2 += t.x2;
    ms += t.s;
    lo1 = std::min(lo1, t.x1);
    lo2 = std::min(lo2, t.x2);
  }
  EXPECT_GE(lo1, 1.0);
  EXPECT_GE(lo2, 3.0);
  // X_i ~ Exp(mu_i, sigma/n), S ~ sigma Gamma(2(n-1))
  EXPECT_NEAR(m1 / reps, 1.5, 4 * 0.5 / std::sqrt(reps));
  EXPECT_NEAR(m2 / reps, 3.5, 4 * 0.5 / std::sqrt(reps));
  EXPECT_NEAR(ms / reps, 12.0, 4 * 2.0 * std::sqrt(6.0) / std::sqrt(reps));
}

TEST(SampleStatistic, MatchesRawSamplesInDistribution) {
  // reduce() of raw exponential samples and the direct draw agree in E[S]
  const PopulationParams p(0.0, 0.0, 1.0);
  RngStream s(3);
  const int reps = 40000, n = 3;
  double raw = 0;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = sample_exponential(s, 0.0, 1.0);
    for (auto& v : b) v = sample_exponential(s, 0.0, 1.0);
    raw += reduce(a, b).s;
  }
  EXPECT_NEAR(raw / reps, 2.0 * (n - 1), 4 * 2.0 / std::sqrt(reps));
}
