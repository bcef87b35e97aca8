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

// Closed-form and numerically optimized bounds on the approximate
// max-information of the Gaussian mechanism and of DP-SGD.
//
// All quantities are in nats. Every function is pure and thread-safe.
// Argument violations throw std::invalid_argument; evaluating a formula
// outside its domain throws dpcert::DomainError.

#ifndef DPCERT_BOUNDS_H_
#define DPCERT_BOUNDS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dpcert/minimize.h"

namespace dpcert {

// DP-SGD hyperparameters that enter the max-information bound.
struct TrainingRecipe {
  std::int64_t epochs = 1;           // E
  std::int64_t steps_per_epoch = 1;  // T
  std::int64_t batch_size = 1;       // m
  double clip_threshold = 1.0;       // zeta, gradient-norm units
  double noise_scale = 1.0;          // sigma, same units
  std::int64_t dataset_size = 1;     // n

  // Throws std::invalid_argument unless E, T, m >= 1, zeta >= 0,
  // sigma > 0 and n >= T * m. zeta = 0 is accepted and yields nu = 0.
  void Validate() const;

  bool operator==(const TrainingRecipe&) const = default;
};

// nu = m * zeta^2 / sigma^2 and the admissible Chernoff interval
// (0, lambda_max) with lambda_max = sqrt(1/nu + 1/4) - 1/2.
struct NoiseRatio {
  double nu = 0.0;
  double lambda_max = 0.0;  // +infinity when nu == 0

  static NoiseRatio Of(const TrainingRecipe& recipe);
  static NoiseRatio Of(double nu);
};

enum class BoundMethod {
  kOptimized,
  kExplicit,
  kGaussianSingle,
  kPureDp,
  kTauClosedForm,
  kDataIndependent,  // prior chosen without looking at the data: kappa = 0
};

std::string_view BoundMethodName(BoundMethod method);
// Throws std::invalid_argument on unknown names.
BoundMethod ParseBoundMethod(std::string_view name);

struct MaxInfoBound {
  double value = 0.0;  // kappa, nats
  double beta = 0.0;   // failure probability the bound holds for
  BoundMethod method = BoundMethod::kOptimized;
  std::optional<TrainingRecipe> recipe;
  // The lambda (optimized), alpha (Gaussian mechanism) or u (closed form)
  // at which the reported infimum was attained.
  std::optional<double> minimizer;
};

// F(x) = (16 nu^2 x^2 + nu x) / (1 - 2 nu x), defined for 0 <= x < 1/(2 nu).
// Throws DomainError when x >= 1/(2 nu).
double BernsteinF(double x, double nu);

// lambda_max for nu > 0, evaluated as (1/nu) / (sqrt(1/nu + 1/4) + 1/2) to
// avoid cancellation at large nu.
double LambdaDomain(double nu);

// kappa = E T nu / 2 + E inf_{lambda in (0, lambda_max)}
//         (T F((lambda + lambda^2) / 2) + log(E / beta)) / lambda.
// The infimum is located on a 4096-point log grid over
// (eps * lambda_max, (1 - 1e-9) lambda_max) and refined with 60
// golden-section iterations. Returns 0 when nu == 0.
MaxInfoBound MaxInfoDpsgdOptimized(const TrainingRecipe& recipe, double beta);

// kappa = E T m (zeta/sigma)^2 (1 + 3q + q^2/2)
//       + E T sqrt(m) (zeta/sigma) (1/2 + 3q + q^2/2),
// q = sqrt((2/T) log(E/beta)).
MaxInfoBound MaxInfoDpsgdExplicit(const TrainingRecipe& recipe, double beta);

// Single Gaussian mechanism on a statistic of m independent samples with
// sensitivity s:
//   inf_{alpha > 0, 1/alpha >= beta - 1/2}
//     (m s^2/sigma^2)(3/4 + q/2 + q^2/4)
//     + (sqrt(m) s/sigma)(1 + q) sqrt(q^2 - log alpha),
// q = sqrt(log((1 + alpha/2) / beta)).
MaxInfoBound MaxInfoGaussianMechanism(std::int64_t m, double sensitivity,
                                      double sigma, double beta);

// Pure epsilon-DP: n eps^2 / 2 + eps sqrt((n/2) log(2/beta)).
MaxInfoBound MaxInfoPureDp(std::int64_t n, double epsilon, double beta);

// Smallest sigma for which the Gaussian mechanism with sensitivity s is
// (epsilon, delta)-DP by the classical calibration, epsilon, delta in (0,1).
double GaussianSigmaForDp(double sensitivity, double epsilon, double delta);

// Ratio of the leading coefficient of the Gaussian-mechanism bound to the
// one obtained from the pure-DP bound under the classical calibration with
// delta = beta. Defined for alpha in (0, 3], beta in (0, 1/2].
double RatioR(double alpha, double beta);

// Per-epoch tail level for the sum of T martingale increments:
//   inf_{lambda} (T F((lambda + lambda^2)/2) + log(1/beta)) / lambda,
// minimized with the same grid-then-golden scheme as the optimized kappa.
ScalarMinimum TauOptimized(std::int64_t steps, double nu, double beta);

// Closed-form upper bound on TauOptimized:
//   T (nu + min(1, sqrt(nu))) (1/2 + 3q + q^2/2), q = sqrt((2/T) log(1/beta)).
double TauClosedForm(std::int64_t steps, double nu, double beta);

// G(u) = -4 + 9 / (2 (1 - u)) + L / u for u in (0, 1), the relaxed
// objective behind TauClosedForm, and its exact minimizer
// u* = sqrt(2L) / (3 + sqrt(2L)).
double RelaxedTauObjective(double u, double log_term_per_step);
double RelaxedTauMinimizer(double log_term_per_step);

}  // namespace dpcert

#endif  // DPCERT_BOUNDS_H_
