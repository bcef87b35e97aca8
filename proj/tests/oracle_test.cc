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

#include "dpcert/oracle.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"

namespace dpcert {
namespace {

double Gauss(double x, double mean, double sigma) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / (sigma * sigma)) /
         (sigma * std::sqrt(2 * std::numbers::pi));
}

TinyInstance SingleShot() {
  TinyInstance inst;
  inst.domain = {0.0, 1.0};
  inst.probabilities = {0.5, 0.5};
  inst.n = 2;
  inst.statistic = StatisticKind::kIdentity;
  inst.clip_threshold = 1.0;
  inst.noise_scale = 5.0;
  return inst;
}

TinyInstance Chain() {
  TinyInstance inst;
  inst.domain = {-1.0, 1.0};
  inst.probabilities = {0.5, 0.5};
  inst.n = 4;
  inst.statistic = StatisticKind::kSquaredLossGradient;
  inst.clip_threshold = 1.0;
  inst.noise_scale = 4.0;
  inst.mechanism = MechanismKind::kDpsgdChain;
  inst.steps = 2;
  inst.batch_size = 2;
  inst.learning_rate = 0.1;
  return inst;
}

TEST(TinyInstanceTest, Validation) {
  EXPECT_NO_THROW(SingleShot().Validate());
  EXPECT_NO_THROW(Chain().Validate());
  TinyInstance bad = SingleShot();
  bad.probabilities = {0.5, 0.6};
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  bad = SingleShot();
  bad.n = 21;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  bad.n = 20;
  EXPECT_EQ(bad.DatasetCount(), 1 << 20);
  bad = Chain();
  bad.steps = 3;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  bad = SingleShot();
  bad.noise_scale = 0.0;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(TinyInstanceTest, StatisticIsBounded) {
  TinyInstance inst = Chain();
  inst.clip_threshold = 0.3;
  for (double theta = -5; theta <= 5; theta += 0.25) {
    for (double x : {-3.0, -0.1, 0.0, 2.0}) {
      EXPECT_LE(std::abs(inst.Statistic(x, theta)), 0.3);
    }
  }
  EXPECT_EQ(inst.Statistic(0.0, 0.1), 0.1);
  inst.statistic = StatisticKind::kZero;
  EXPECT_EQ(inst.Statistic(1.0, 2.0), 0.0);
}

TEST(MarginalDensityTest, SingletonDomainEqualsConditional) {
  TinyInstance inst = SingleShot();
  inst.domain = {0.7};
  inst.probabilities = {1.0};
  inst.n = 3;
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const TinyDataset data = SampleDataset(inst, rng);
    const Release r = SampleRelease(inst, data, rng);
    EXPECT_NEAR(ExactLogMarginalDensity(inst, r), LogConditionalDensity(inst, data, r), 1e-12);
    EXPECT_NEAR(PrivacyLoss(inst, data, r), 0.0, 1e-12);
  }
  EXPECT_EQ(SampleFTail(inst, 500, 1e-9, 3).tail, 0.0);
}

TEST(MarginalDensityTest, TwoDatasetMixture) {
  TinyInstance inst = SingleShot();
  inst.domain = {-0.8, 0.8};
  inst.n = 1;
  inst.noise_scale = 0.6;
  for (double y = -4; y <= 4; y += 0.37) {
    const double expected = 0.5 * (Gauss(y, 0.8, 0.6) + Gauss(y, -0.8, 0.6));
    EXPECT_NEAR(ExactMarginalDensity(inst, {{}, {y}}), expected, 1e-14);
  }
}

TEST(MarginalDensityTest, SymmetricInstanceIsEven) {
  TinyInstance inst = SingleShot();
  inst.domain = {-1.0, 0.0, 1.0};
  inst.probabilities = {0.3, 0.4, 0.3};
  inst.n = 4;
  for (double y = 0.1; y < 10; y *= 1.7) {
    EXPECT_NEAR(ExactLogMarginalDensity(inst, {{}, {y}}),
                ExactLogMarginalDensity(inst, {{}, {-y}}), 1e-12);
  }
}

TEST(MarginalDensityTest, StableInFarTails) {
  TinyInstance inst = SingleShot();
  inst.noise_scale = 0.01;
  const double lp = ExactLogMarginalDensity(inst, {{}, {40.0}});
  EXPECT_TRUE(std::isfinite(lp));
  // Dominated by the dataset with sum 2, probability 1/4.
  const double expected = std::log(0.25) - 0.5 * (38.0 / 0.01) * (38.0 / 0.01) -
                          std::log(0.01 * std::sqrt(2 * std::numbers::pi));
  EXPECT_NEAR(lp, expected, 1e-6 * std::abs(expected));
}

TEST(MarginalDensityTest, ChainMatchesDirectSum) {
  TinyInstance inst = Chain();
  inst.probabilities = {0.3, 0.7};
  Rng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const TinyDataset data = SampleDataset(inst, rng);
    const Release r = SampleRelease(inst, data, rng);
    // Direct evaluation in linear space over all 16 datasets.
    double direct = 0.0;
    for (int code = 0; code < 16; ++code) {
      double prob = 1.0;
      std::vector<double> x(4);
      for (int i = 0; i < 4; ++i) {
        const int v = (code >> i) & 1;
        prob *= inst.probabilities[v];
        x[i] = inst.domain[v];
      }
      double theta = inst.theta0, density = 1.0;
      for (int t = 0; t < 2; ++t) {
        double psi = 0.0;
        for (std::int64_t i : r.plans[0].batches[t]) {
          psi += std::clamp(theta - x[i], -1.0, 1.0);
        }
        density *= Gauss(r.values[t], psi, inst.noise_scale);
        theta -= inst.learning_rate * r.values[t];
      }
      direct += prob * density;
    }
    EXPECT_NEAR(ExactMarginalDensity(inst, r), direct, 1e-12 * direct);
  }
}

TEST(SampleDatasetTest, FollowsProbabilities) {
  TinyInstance inst = SingleShot();
  inst.domain = {1.0, 2.0, 3.0};
  inst.probabilities = {0.2, 0.0, 0.8};
  inst.n = 10;
  Rng rng(2);
  int ones = 0, total = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    for (int v : SampleDataset(inst, rng)) {
      EXPECT_NE(v, 1);
      ones += v == 0;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(ones) / total, 0.2, 5 * std::sqrt(0.16 / total));
}

TEST(TailTest, BasicProperties) {
  const TinyInstance inst = Chain();
  const std::vector<double> f = SampleF(inst, 4000, 9);
  EXPECT_EQ(TailOf(f, -std::numeric_limits<double>::infinity()).tail, 1.0);
  double prev = 1.0;
  for (double k = -2; k <= 3; k += 0.1) {
    const TailEstimate t = TailOf(f, k);
    EXPECT_LE(t.tail, prev);
    EXPECT_NEAR(t.radius, 3 * std::sqrt(t.tail * (1 - t.tail) / 4000), 1e-15);
    prev = t.tail;
  }
  const TailEstimate direct = SampleFTail(inst, 4000, 0.5, 9);
  EXPECT_EQ(direct.exceedances, TailOf(f, 0.5).exceedances);
  EXPECT_THROW(SampleF(inst, 0, 1), std::invalid_argument);
}

TEST(TailTest, IndependentOfWorkerCount) {
  const TinyInstance inst = SingleShot();
  const std::vector<double> a = SampleF(inst, 3000, 5);
  ::setenv("DPCERT_THREADS", "1", 1);
  const std::vector<double> b = SampleF(inst, 3000, 5);
  ::unsetenv("DPCERT_THREADS");
  EXPECT_EQ(a, b);
}

TEST(ValidateBoundTest, MeanOfExpFIsAtLeastOne) {
  for (const TinyInstance& inst : {SingleShot(), Chain()}) {
    const BoundMethod method = inst.mechanism == MechanismKind::kSingleShot
                                   ? BoundMethod::kGaussianSingle
                                   : BoundMethod::kOptimized;
    const OracleVerdict v = ValidateBound(inst, method, 0.1, 20000, 6);
    EXPECT_TRUE(std::isfinite(v.log_mean_exp_f));
    EXPECT_GT(v.log_mean_exp_f, -0.05);
  }
}

TEST(ValidateBoundTest, PassesOnSmallRuns) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const OracleVerdict s =
        ValidateBound(SingleShot(), BoundMethod::kGaussianSingle, 0.05, 10000, seed);
    EXPECT_TRUE(s.pass);
    EXPECT_GT(s.kappa, 0.0);
    const OracleVerdict c = ValidateBound(Chain(), BoundMethod::kOptimized, 0.1, 10000, seed);
    EXPECT_TRUE(c.pass);
    const OracleVerdict e = ValidateBound(Chain(), BoundMethod::kExplicit, 0.1, 10000, seed);
    EXPECT_TRUE(e.pass);
    EXPECT_GE(e.kappa, c.kappa);
  }
}

TEST(ValidateBoundTest, PureNoiseAlwaysPasses) {
  TinyInstance inst = Chain();
  inst.statistic = StatisticKind::kZero;
  for (double f : SampleF(inst, 200, 2)) EXPECT_NEAR(f, 0.0, 1e-12);
  EXPECT_TRUE(ValidateBound(inst, BoundMethod::kOptimized, 0.1, 2000, 1).pass);
}

TEST(ValidateBoundTest, DetectsAnInvalidThreshold) {
  const OracleVerdict v =
      ValidateBound(Chain(), BoundMethod::kOptimized, 0.1, 20000, 1, 0.125);
  EXPECT_FALSE(v.pass);
  EXPECT_GT(v.tail.tail, 0.1 + v.tail.radius);
}

TEST(ValidateBoundTest, QuarterKappaDoesNotFailAtHighNoiseRatio) {
  // f is at most log(#datasets) = log 16 while kappa grows with nu, so a
  // quarter of kappa is still far above every sampled f.
  TinyInstance inst = Chain();
  inst.noise_scale = 0.5;
  const OracleVerdict v = ValidateBound(inst, BoundMethod::kOptimized, 0.1, 5000, 1, 0.25);
  EXPECT_GT(0.25 * v.kappa, std::log(16.0));
  EXPECT_TRUE(v.pass);
}

TEST(ValidateBoundTest, RejectsMismatchedMethods) {
  EXPECT_THROW(ValidateBound(SingleShot(), BoundMethod::kOptimized, 0.1, 10, 1),
               std::invalid_argument);
  EXPECT_THROW(ValidateBound(Chain(), BoundMethod::kGaussianSingle, 0.1, 10, 1),
               std::invalid_argument);
  EXPECT_THROW(ValidateBound(Chain(), BoundMethod::kPureDp, 0.1, 10, 1),
               std::invalid_argument);
}

}  // namespace
}  // namespace dpcert
