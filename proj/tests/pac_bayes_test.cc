// Copyright 2026 The dpcert Authors.
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

#include "dpcert/pac_bayes.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gtest/gtest.h"

namespace dpcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(BinaryKlTest, HandValues) {
  EXPECT_EQ(BinaryKl(0.3, 0.3), 0.0);
  EXPECT_NEAR(BinaryKl(0.0, 0.5), std::log(2.0), 1e-15);
  EXPECT_GE(BinaryKl(0.1, 0.4), 0.18);
  EXPECT_EQ(BinaryKl(0.5, 0.0), kInf);
  EXPECT_EQ(BinaryKl(0.5, 1.0), kInf);
  EXPECT_EQ(BinaryKl(1.0, 1.0), 0.0);
  EXPECT_THROW(BinaryKl(1.5, 0.5), std::invalid_argument);
  EXPECT_THROW(BinaryKl(0.5, -0.1), std::invalid_argument);
}

TEST(BinaryKlTest, PinskerLowerBound) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double q = u(gen), p = std::clamp(u(gen), 1e-9, 1 - 1e-9);
    EXPECT_GE(BinaryKl(q, p), 2 * (q - p) * (q - p) - 1e-15);
  }
}

TEST(KlInverseTest, HandValues) {
  for (double q : {0.0, 0.2, 0.77, 1.0}) EXPECT_EQ(KlInverse(q, 0.0), q);
  // kl(0 || p) = -log(1 - p).
  EXPECT_NEAR(KlInverse(0.0, std::log(2.0)), 0.5, 1e-12);
  EXPECT_NEAR(KlInverse(0.0, 1.0), 1 - std::exp(-1.0), 1e-12);
  EXPECT_EQ(KlInverse(0.3, 50.0), 1.0);
  EXPECT_THROW(KlInverse(0.3, -1.0), std::invalid_argument);
}

TEST(KlInverseTest, SaturatesExactlyAtThreshold) {
  const double q = 0.25;
  const double edge = BinaryKl(q, 1 - kKlInverseSaturation);
  EXPECT_EQ(KlInverse(q, edge), 1.0);
  EXPECT_LT(KlInverse(q, edge * (1 - 1e-6)), 1.0);
}

TEST(KlInverseTest, RoundTripOnRandomPairs) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int interior = 0;
  for (int i = 0; i < 10000; ++i) {
    const double q = u(gen);
    const double b = std::pow(10.0, -8.0 + 9.0 * u(gen));
    const double p = KlInverse(q, b);
    ASSERT_GE(p, q);
    ASSERT_LE(p, 1.0);
    if (p < 1.0) {
      ++interior;
      const double k = BinaryKl(q, p);
      EXPECT_LE(k, b) << q << " " << b;
      EXPECT_GE(k, b - 1e-8) << q << " " << b;
    }
    EXPECT_GE(PinskerGap(q, b), p);
  }
  EXPECT_GT(interior, 5000);
}

TEST(KlInverseTest, MonotoneInBudget) {
  double prev = 0.1;
  for (double b = 1e-4; b < 3; b *= 1.5) {
    const double p = KlInverse(0.1, b);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(PinskerGapTest, Values) {
  EXPECT_NEAR(PinskerGap(0.1, 0.02), 0.2, 1e-15);
  EXPECT_EQ(PinskerGap(0.4, 0.0), 0.4);
  EXPECT_EQ(PinskerGap(0.9, 5.0), 1.0);
}

TEST(StochasticModelTest, Validation) {
  EXPECT_NO_THROW(StochasticModel::Isotropic({1, 2, 3}, 0.5));
  EXPECT_THROW(StochasticModel::Isotropic({1, 2}, 0.0), std::invalid_argument);
  StochasticModel bad{{1, 2}, {1}};
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

// Per-coordinate integral of p log(p / q) by composite Simpson.
double QuadratureKl(double mp, double vp, double mq, double vq) {
  const double sp = std::sqrt(vp);
  const double lo = mp - 14 * sp, hi = mp + 14 * sp;
  const int n = 20000;
  const double h = (hi - lo) / n;
  auto integrand = [&](double x) {
    const double lp = -0.5 * std::log(2 * M_PI * vp) - (x - mp) * (x - mp) / (2 * vp);
    const double lq = -0.5 * std::log(2 * M_PI * vq) - (x - mq) * (x - mq) / (2 * vq);
    return std::exp(lp) * (lp - lq);
  };
  double sum = integrand(lo) + integrand(hi);
  for (int i = 1; i < n; ++i) sum += integrand(lo + i * h) * (i % 2 ? 4 : 2);
  return sum * h / 3;
}

TEST(GaussianKlTest, ClosedFormCases) {
  const StochasticModel a{{0.5, -1.0, 2.0}, {1.0, 0.3, 2.0}};
  EXPECT_EQ(GaussianKl(a, a), 0.0);
  const StochasticModel unit{{0.0, 0.0}, {1.0, 1.0}};
  const StochasticModel shifted{{0.0, 1.7}, {1.0, 1.0}};
  EXPECT_NEAR(GaussianKl(shifted, unit), 1.7 * 1.7 / 2, 1e-15);
  EXPECT_THROW(GaussianKl(a, unit), std::invalid_argument);
}

TEST(GaussianKlTest, MatchesQuadratureAndIsPositive) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> mean(-2, 2), var(0.2, 3);
  for (int rep = 0; rep < 5; ++rep) {
    StochasticModel p, q;
    double reference = 0;
    for (int i = 0; i < 10; ++i) {
      p.mean.push_back(mean(gen));
      p.variance.push_back(var(gen));
      q.mean.push_back(mean(gen));
      q.variance.push_back(var(gen));
      reference += QuadratureKl(p.mean[i], p.variance[i], q.mean[i], q.variance[i]);
    }
    EXPECT_NEAR(GaussianKl(p, q), reference, 1e-4);
    EXPECT_GT(GaussianKl(p, q), 0.0);
  }
}

TEST(PacBayesRhsTest, ValuesAndMonotonicity) {
  EXPECT_NEAR(PacBayesRhs(0, 0, 16, 1.0), std::log(16.0) / 16, 1e-15);
  EXPECT_LT(PacBayesRhs(3, 2, 200, 0.05), PacBayesRhs(3, 2, 100, 0.05));
  EXPECT_LT(PacBayesRhs(3, 2, 100, 0.05), PacBayesRhs(4, 2, 100, 0.05));
  EXPECT_LT(PacBayesRhs(3, 2, 100, 0.05), PacBayesRhs(3, 3, 100, 0.05));
  EXPECT_LT(PacBayesRhs(3, 2, 100, 0.1), PacBayesRhs(3, 2, 100, 0.05));
  const double kappa = 4.2;
  EXPECT_NEAR(PacBayesRhs(0, kappa, 500, 0.05),
              (kappa + std::log(4 * std::sqrt(500.0) / 0.05)) / 500, 1e-15);
  EXPECT_THROW(PacBayesRhs(0, 0, 0, 0.05), std::invalid_argument);
  EXPECT_THROW(PacBayesRhs(0, 0, 10, 0.0), std::invalid_argument);
}

TEST(McEriskUpperTest, Values) {
  const double zero = McEriskUpper(0.0, 1000, 0.01);
  EXPECT_GT(zero, 0.0);
  EXPECT_EQ(zero, KlInverse(0.0, std::log(2 * std::sqrt(1000.0) / 0.01) / 1000));
  const double large_n_scale = McEriskUpper(0.1, 150000, 0.0125);
  EXPECT_GT(large_n_scale, 0.1);
  EXPECT_LT(large_n_scale, 0.12);
  double prev = 1.0;
  for (std::int64_t n : {10, 100, 1000, 10000, 100000, 10000000}) {
    const double v = McEriskUpper(0.1, n, 0.0125);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev - 0.1, 1e-3);
}

TEST(UnionBoundCertificateTest, DefaultSplitAccepted) {
  const ConfidenceSplit split{0.05, 0.0125, 0.025};
  EXPECT_NO_THROW(split.Validate());
  EXPECT_NEAR(split.UnionSlack(), 0.0125, 1e-15);
  const MaxInfoBound kappa{3.0, 0.025 / 100, BoundMethod::kOptimized, {}, {}};
  const RiskCertificate c = UnionBoundCertificate(
      {0.1, 150000, RiskKind::kMonteCarlo}, 20.0, kappa, 2000, split, {100, 7});
  EXPECT_NEAR(c.failure_probability, 0.0625, 1e-15);
  EXPECT_GE(c.risk_upper_bound, c.empirical_risk_upper);
  EXPECT_GE(c.empirical_risk_upper, c.empirical_risk);
  EXPECT_LE(c.risk_upper_bound, 1.0);
  const double log_term =
      std::log(2.0 * 100 * 7 * std::sqrt(2000.0) / 0.0125);
  EXPECT_NEAR(c.complexity, (20.0 + 3.0 + log_term) / 2000, 1e-14);
  EXPECT_GE(c.risk_upper_bound, KlInverse(c.empirical_risk_upper, c.complexity));
  EXPECT_LE(c.risk_upper_bound,
            KlInverse(c.empirical_risk_upper, c.complexity) + 1e-9);
}

TEST(UnionBoundCertificateTest, RejectsNonPositiveSlack) {
  const MaxInfoBound kappa{0.0, 0.01, BoundMethod::kDataIndependent, {}, {}};
  EXPECT_THROW(UnionBoundCertificate({0.1, 1, RiskKind::kExact}, 0.0, kappa,
                                     100, {0.05, 0.03, 0.025}, {1, 1}),
               std::invalid_argument);
  EXPECT_THROW(UnionBoundCertificate({0.1, 1, RiskKind::kExact}, 0.0, kappa,
                                     100, {0.05, 0.04, 0.02}, {1, 1}),
               std::invalid_argument);
}

TEST(UnionBoundCertificateTest, SingleCellMatchesTheoremForm) {
  const MaxInfoBound kappa{2.5, 1e-9, BoundMethod::kOptimized, {}, {}};
  const ConfidenceSplit split{0.05, 1e-9, 1e-9};
  const RiskCertificate c = UnionBoundCertificate(
      {0.08, 1, RiskKind::kExact}, 12.0, kappa, 1000, split, {1, 1});
  EXPECT_EQ(c.empirical_risk_upper, 0.08);
  const double two_form =
      KlInverse(0.08, (12.0 + 2.5 + std::log(2 * std::sqrt(1000.0) / 0.05)) / 1000);
  EXPECT_NEAR(c.risk_upper_bound, two_form, 2e-9);
  // The constant 2 (against 4) makes the single-cell form slightly tighter.
  EXPECT_LT(c.risk_upper_bound, PacBayesRiskBound(0.08, 12.0, 2.5, 1000, 0.05));
}

TEST(UnionBoundCertificateTest, MonotoneInGridAndInputs) {
  const ConfidenceSplit split{0.05, 0.0125, 0.025};
  const MaxInfoBound kappa{5.0, 0.001, BoundMethod::kOptimized, {}, {}};
  const RiskEstimate r{0.2, 5000, RiskKind::kMonteCarlo};
  auto bound = [&](double kl, double k, std::int64_t n, std::int64_t k1,
                   std::int64_t k2) {
    MaxInfoBound kk = kappa;
    kk.value = k;
    return UnionBoundCertificate(r, kl, kk, n, split, {k1, k2}).risk_upper_bound;
  };
  const double base = bound(10, 5, 1000, 10, 3);
  EXPECT_LE(base, bound(10, 5, 1000, 20, 3));
  EXPECT_LE(base, bound(10, 5, 1000, 10, 6));
  EXPECT_LT(base, bound(20, 5, 1000, 10, 3));
  EXPECT_LT(base, bound(10, 9, 1000, 10, 3));
  EXPECT_GT(base, bound(10, 5, 4000, 10, 3));
}

TEST(PacBayesRiskBoundTest, PriorEqualPosteriorMatchesCorollary) {
  for (double kappa : {0.0, 1.0, 30.0}) {
    const double eq11 = KlInverse(0.1, (kappa + std::log(4 * std::sqrt(800.0) / 0.05)) / 800);
    EXPECT_LE(eq11, PacBayesRiskBound(0.1, 0.0, kappa, 800, 0.05));
    EXPECT_EQ(eq11, PacBayesRiskBound(0.1, 0.0, kappa, 800, 0.05));
  }
}

TEST(RoundUpTest, RoundsTowardLarger) {
  EXPECT_EQ(RoundUp(1.0), 1.0);
  EXPECT_EQ(RoundUp(1.5), 1.0);
  EXPECT_GE(RoundUp(0.1234567891234), 0.1234567891234);
  EXPECT_NEAR(RoundUp(0.1234567891234), 0.123456790, 1e-15);
  EXPECT_EQ(RoundUp(0.0), 0.0);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(gen);
    const double r = RoundUp(x);
    EXPECT_GE(r, x);
    EXPECT_LE(r - x, 1.0000001e-9);
  }
}

}  // namespace
}  // namespace dpcert
