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

// Exact-enumeration oracle for the privacy-loss variable
//   f(S, Y) = log p(Y | S) - log p(Y)
// of Gaussian releases on tiny finite data domains, and Monte-Carlo checks
// of the tail claim P{f(S, Y) >= kappa} <= beta.
//
// Samples are scalars and statistics are one-dimensional.

#ifndef DPCERT_ORACLE_H_
#define DPCERT_ORACLE_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dpcert/bounds.h"
#include "dpcert/dpsgd.h"
#include "dpcert/rng.h"

namespace dpcert {

// phi(x; theta):
//   identity:              clip(x, zeta)
//   zero:                  0
//   squared_loss_gradient: clip(theta - x, zeta), the gradient of
//                          (theta - x)^2 / 2
enum class StatisticKind { kIdentity, kZero, kSquaredLossGradient };
std::string_view StatisticKindName(StatisticKind kind);
StatisticKind ParseStatisticKind(std::string_view name);

// single_shot: Y = sum_i phi(x_i; theta0) + sigma z over all n samples.
// dpsgd_chain: E epochs of T steps; u_t = sum_{i in B_t} phi(x_i;
// theta_{t-1}) + sigma z_t and theta_t = theta_{t-1} - eta u_t. The release
// is the extended output (batch plans, u_1..u_{E T}); theta_0 is fixed.
enum class MechanismKind { kSingleShot, kDpsgdChain };
std::string_view MechanismKindName(MechanismKind kind);
MechanismKind ParseMechanismKind(std::string_view name);

inline constexpr std::int64_t kMaxEnumeratedDatasets = std::int64_t{1} << 20;

struct TinyInstance {
  std::vector<double> domain;
  std::vector<double> probabilities;
  std::int64_t n = 1;
  StatisticKind statistic = StatisticKind::kIdentity;
  double clip_threshold = 1.0;  // zeta, bound on |phi|
  double noise_scale = 1.0;     // sigma
  MechanismKind mechanism = MechanismKind::kSingleShot;
  // dpsgd_chain only.
  std::int64_t epochs = 1;
  std::int64_t steps = 1;
  std::int64_t batch_size = 1;
  double learning_rate = 0.5;
  double theta0 = 0.0;

  // Throws std::invalid_argument on malformed instances, including
  // |domain|^n > kMaxEnumeratedDatasets.
  void Validate() const;
  std::int64_t DatasetCount() const;
  double Statistic(double x, double theta) const;
  // The DP-SGD recipe the chain corresponds to.
  TrainingRecipe Recipe() const;
};

// A dataset is a vector of n indices into the domain.
using TinyDataset = std::vector<int>;

struct Release {
  std::vector<BatchPlan> plans;  // dpsgd_chain only, one per epoch
  std::vector<double> values;    // y (single shot) or u_1..u_{E T}
};

TinyDataset SampleDataset(const TinyInstance& instance, Rng& rng);
Release SampleRelease(const TinyInstance& instance, const TinyDataset& data,
                      Rng& rng);

// log p(y | S), excluding the data-independent batch-plan probability.
double LogConditionalDensity(const TinyInstance& instance,
                             const TinyDataset& data, const Release& release);
// log p(y) = log sum_{S'} P(S') p(y | S'), by log-sum-exp over every dataset.
double ExactLogMarginalDensity(const TinyInstance& instance,
                               const Release& release);
double ExactMarginalDensity(const TinyInstance& instance,
                            const Release& release);

double PrivacyLoss(const TinyInstance& instance, const TinyDataset& data,
                   const Release& release);

// f(S, Y) for `trials` independent draws of (S, Y). Trial k uses the
// substream Rng(seed).Split(k), so results do not depend on the number of
// worker threads.
std::vector<double> SampleF(const TinyInstance& instance, std::int64_t trials,
                            std::uint64_t seed);

struct TailEstimate {
  double tail = 0.0;    // fraction of trials with f >= kappa
  double radius = 0.0;  // 3 sqrt(tail (1 - tail) / trials)
  std::int64_t trials = 0;
  std::int64_t exceedances = 0;
};

TailEstimate TailOf(std::span<const double> f_values, double kappa);
TailEstimate SampleFTail(const TinyInstance& instance, std::int64_t trials,
                         double kappa, std::uint64_t seed);

struct OracleVerdict {
  BoundMethod method = BoundMethod::kOptimized;
  double beta = 0.0;
  double kappa = 0.0;            // bound value
  double threshold_scale = 1.0;  // tail is evaluated at threshold_scale * kappa
  TailEstimate tail;
  double log_mean_exp_f = 0.0;   // log of the sample mean of e^f
  bool pass = false;             // tail <= beta + radius
};

// Computes kappa with `method` (gaussian-single for single-shot instances
// with m = n and s = zeta; optimized or explicit for chains), samples f and
// passes iff the empirical tail at threshold_scale * kappa is at most
// beta + radius. Mismatched method and mechanism throw
// std::invalid_argument.
OracleVerdict ValidateBound(const TinyInstance& instance, BoundMethod method,
                            double beta, std::int64_t trials,
                            std::uint64_t seed, double threshold_scale = 1.0);

}  // namespace dpcert

#endif  // DPCERT_ORACLE_H_
