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
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dpcert/parallel.h"

namespace dpcert {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogNormalDensity(double x, double mean, double sigma) {
  const double r = (x - mean) / sigma;
  return -0.5 * r * r - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// phi(v; theta_{t-1}) for every step t and domain value v, given the
// parameters replayed from the release.
std::vector<std::vector<double>> StatisticTable(const TinyInstance& instance,
                                                const Release& release) {
  std::vector<std::vector<double>> table;
  double theta = instance.theta0;
  const std::size_t steps =
      instance.mechanism == MechanismKind::kSingleShot ? 1 : release.values.size();
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> row(instance.domain.size());
    for (std::size_t v = 0; v < row.size(); ++v) {
      row[v] = instance.Statistic(instance.domain[v], theta);
      if (!(std::abs(row[v]) <= instance.clip_threshold)) {
        throw std::logic_error("statistic exceeds the clip threshold");
      }
    }
    table.push_back(std::move(row));
    if (instance.mechanism == MechanismKind::kDpsgdChain) {
      theta -= instance.learning_rate * release.values[t];
    }
  }
  return table;
}

void CheckRelease(const TinyInstance& instance, const Release& release) {
  if (instance.mechanism == MechanismKind::kSingleShot) {
    if (release.values.size() != 1) {
      throw std::invalid_argument("single-shot release must hold one value");
    }
    return;
  }
  if (release.plans.size() != static_cast<std::size_t>(instance.epochs) ||
      release.values.size() !=
          static_cast<std::size_t>(instance.epochs * instance.steps)) {
    throw std::invalid_argument("chain release does not match E and T");
  }
}

double LogConditionalFromTable(const TinyInstance& instance,
                               const std::vector<std::vector<double>>& table,
                               const TinyDataset& data, const Release& release) {
  const double sigma = instance.noise_scale;
  if (instance.mechanism == MechanismKind::kSingleShot) {
    double psi = 0.0;
    for (int v : data) psi += table[0][v];
    return LogNormalDensity(release.values[0], psi, sigma);
  }
  double total = 0.0;
  std::size_t t = 0;
  for (const BatchPlan& plan : release.plans) {
    for (const std::vector<std::int64_t>& batch : plan.batches) {
      double psi = 0.0;
      for (std::int64_t i : batch) psi += table[t][data[i]];
      total += LogNormalDensity(release.values[t], psi, sigma);
      ++t;
    }
  }
  return total;
}

}  // namespace

std::string_view StatisticKindName(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::kIdentity:
      return "identity";
    case StatisticKind::kZero:
      return "zero";
    case StatisticKind::kSquaredLossGradient:
      return "squared_loss_gradient";
  }
  return "unknown";
}

StatisticKind ParseStatisticKind(std::string_view name) {
  for (StatisticKind k : {StatisticKind::kIdentity, StatisticKind::kZero,
                          StatisticKind::kSquaredLossGradient}) {
    if (StatisticKindName(k) == name) return k;
  }
  throw std::invalid_argument("unknown statistic '" + std::string(name) + "'");
}

std::string_view MechanismKindName(MechanismKind kind) {
  return kind == MechanismKind::kSingleShot ? "single_shot" : "dpsgd_chain";
}

MechanismKind ParseMechanismKind(std::string_view name) {
  if (name == "single_shot") return MechanismKind::kSingleShot;
  if (name == "dpsgd_chain") return MechanismKind::kDpsgdChain;
  throw std::invalid_argument("unknown mechanism '" + std::string(name) + "'");
}

void TinyInstance::Validate() const {
  if (domain.empty()) throw std::invalid_argument("instance domain is empty");
  if (probabilities.size() != domain.size()) {
    throw std::invalid_argument("instance needs one probability per domain value");
  }
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("instance probabilities must lie in [0, 1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("instance probabilities must sum to 1");
  }
  for (double x : domain) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite domain value");
  }
  if (n < 1) throw std::invalid_argument("instance n must be >= 1");
  if (!(clip_threshold > 0.0) || !std::isfinite(clip_threshold)) {
    throw std::invalid_argument("instance clip threshold must be positive");
  }
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) {
    throw std::invalid_argument("instance noise scale must be positive");
  }
  if (mechanism == MechanismKind::kDpsgdChain) {
    if (epochs < 1 || steps < 1 || batch_size < 1 || n / steps < batch_size) {
      throw std::invalid_argument("chain needs E, T, m >= 1 and T * m <= n");
    }
    if (!std::isfinite(learning_rate) || !std::isfinite(theta0)) {
      throw std::invalid_argument("chain learning rate and theta0 must be finite");
    }
  }
  DatasetCount();
}

std::int64_t TinyInstance::DatasetCount() const {
  const auto k = static_cast<std::int64_t>(domain.size());
  std::int64_t count = 1;
  for (std::int64_t i = 0; i < n; ++i) {
    if (count > kMaxEnumeratedDatasets / std::max<std::int64_t>(k, 1)) {
      throw std::invalid_argument(
          "enumeration infeasible: |domain|^n exceeds 2^20");
    }
    count *= k;
  }
  return count;
}

double TinyInstance::Statistic(double x, double theta) const {
  switch (statistic) {
    case StatisticKind::kIdentity:
      return std::clamp(x, -clip_threshold, clip_threshold);
    case StatisticKind::kZero:
      return 0.0;
    case StatisticKind::kSquaredLossGradient:
      return std::clamp(theta - x, -clip_threshold, clip_threshold);
  }
  return 0.0;
}

TrainingRecipe TinyInstance::Recipe() const {
  return {epochs, steps, batch_size, clip_threshold, noise_scale, n};
}

TinyDataset SampleDataset(const TinyInstance& instance, Rng& rng) {
  TinyDataset data(instance.n);
  for (int& v : data) {
    const double u = rng.Uniform();
    double acc = 0.0;
    v = static_cast<int>(instance.domain.size()) - 1;
    for (std::size_t k = 0; k < instance.domain.size(); ++k) {
      acc += instance.probabilities[k];
      if (u < acc) {
        v = static_cast<int>(k);
        break;
      }
    }
    while (instance.probabilities[v] == 0.0) --v;  // rounding at the top end
  }
  return data;
}

Release SampleRelease(const TinyInstance& instance, const TinyDataset& data,
                      Rng& rng) {
  Release release;
  const double sigma = instance.noise_scale;
  if (instance.mechanism == MechanismKind::kSingleShot) {
    double psi = 0.0;
    for (int v : data) psi += instance.Statistic(instance.domain[v], instance.theta0);
    release.values.push_back(psi + sigma * rng.Normal());
    return release;
  }
  double theta = instance.theta0;
  for (std::int64_t e = 0; e < instance.epochs; ++e) {
    release.plans.push_back(
        CreateBatches(instance.n, instance.batch_size, instance.steps, rng()));
    for (const std::vector<std::int64_t>& batch : release.plans.back().batches) {
      double psi = 0.0;
      for (std::int64_t i : batch) psi += instance.Statistic(instance.domain[data[i]], theta);
      const double u = psi + sigma * rng.Normal();
      release.values.push_back(u);
      theta -= instance.learning_rate * u;
    }
  }
  return release;
}

double LogConditionalDensity(const TinyInstance& instance,
                             const TinyDataset& data, const Release& release) {
  instance.Validate();
  CheckRelease(instance, release);
  if (data.size() != static_cast<std::size_t>(instance.n)) {
    throw std::invalid_argument("dataset size does not match the instance");
  }
  return LogConditionalFromTable(instance, StatisticTable(instance, release),
                                 data, release);
}

double ExactLogMarginalDensity(const TinyInstance& instance,
                               const Release& release) {
  instance.Validate();
  CheckRelease(instance, release);
  const std::vector<std::vector<double>> table = StatisticTable(instance, release);
  const std::int64_t count = instance.DatasetCount();
  const int k = static_cast<int>(instance.domain.size());
  std::vector<double> log_p(k);
  for (int v = 0; v < k; ++v) {
    log_p[v] = instance.probabilities[v] > 0.0 ? std::log(instance.probabilities[v])
                                               : kNegInf;
  }
  std::vector<double> terms;
  terms.reserve(count);
  TinyDataset data(instance.n, 0);
  for (std::int64_t c = 0; c < count; ++c) {
    double lp = 0.0;
    for (int v : data) lp += log_p[v];
    if (lp > kNegInf) {
      terms.push_back(lp + LogConditionalFromTable(instance, table, data, release));
    }
    for (std::int64_t i = 0; i < instance.n; ++i) {  // mixed-radix increment
      if (++data[i] < k) break;
      data[i] = 0;
    }
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

double ExactMarginalDensity(const TinyInstance& instance,
                            const Release& release) {
  return std::exp(ExactLogMarginalDensity(instance, release));
}

double PrivacyLoss(const TinyInstance& instance, const TinyDataset& data,
                   const Release& release) {
  return LogConditionalDensity(instance, data, release) -
         ExactLogMarginalDensity(instance, release);
}

std::vector<double> SampleF(const TinyInstance& instance, std::int64_t trials,
                            std::uint64_t seed) {
  instance.Validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<double> f(trials);
  const Rng root(seed);
  ParallelFor(f.size(), [&](std::size_t k) {
    Rng rng = root.Split(k);
    const TinyDataset data = SampleDataset(instance, rng);
    const Release release = SampleRelease(instance, data, rng);
    f[k] = PrivacyLoss(instance, data, release);
  });
  return f;
}

TailEstimate TailOf(std::span<const double> f_values, double kappa) {
  if (f_values.empty()) throw std::invalid_argument("no samples");
  TailEstimate est;
  est.trials = static_cast<std::int64_t>(f_values.size());
  for (double f : f_values) {
    if (f >= kappa) ++est.exceedances;
  }
  const double t = static_cast<double>(est.trials);
  est.tail = static_cast<double>(est.exceedances) / t;
  est.radius = 3.0 * std::sqrt(est.tail * (1.0 - est.tail) / t);
  return est;
}

TailEstimate SampleFTail(const TinyInstance& instance, std::int64_t trials,
                         double kappa, std::uint64_t seed) {
  const std::vector<double> f = SampleF(instance, trials, seed);
  return TailOf(f, kappa);
}

OracleVerdict ValidateBound(const TinyInstance& instance, BoundMethod method,
                            double beta, std::int64_t trials,
                            std::uint64_t seed, double threshold_scale) {
  instance.Validate();
  if (!(threshold_scale >= 0.0) || !std::isfinite(threshold_scale)) {
    throw std::invalid_argument("threshold scale must be finite and >= 0");
  }
  OracleVerdict verdict;
  verdict.method = method;
  verdict.beta = beta;
  verdict.threshold_scale = threshold_scale;
  if (instance.mechanism == MechanismKind::kSingleShot) {
    if (method != BoundMethod::kGaussianSingle) {
      throw std::invalid_argument("single-shot instances are checked with gaussian-single");
    }
    verdict.kappa = MaxInfoGaussianMechanism(instance.n, instance.clip_threshold,
                                             instance.noise_scale, beta).value;
  } else if (method == BoundMethod::kOptimized) {
    verdict.kappa = MaxInfoDpsgdOptimized(instance.Recipe(), beta).value;
  } else if (method == BoundMethod::kExplicit) {
    verdict.kappa = MaxInfoDpsgdExplicit(instance.Recipe(), beta).value;
  } else {
    throw std::invalid_argument("dpsgd-chain instances are checked with optimized or explicit");
  }
  const std::vector<double> f = SampleF(instance, trials, seed);
  verdict.tail = TailOf(f, threshold_scale * verdict.kappa);
  const double top = *std::max_element(f.begin(), f.end());
  double sum = 0.0;
  for (double v : f) sum += std::exp(v - top);
  verdict.log_mean_exp_f = top + std::log(sum / static_cast<double>(f.size()));
  verdict.pass = verdict.tail.tail <= beta + verdict.tail.radius;
  return verdict;
}

}  // namespace dpcert
