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

#include "dpcert/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpcert/errors.h"

namespace dpcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gaussian-mechanism alpha search range when beta <= 1/2 leaves it unbounded.
constexpr double kAlphaLo = 1e-12;
constexpr double kAlphaHi = 1e12;

void RequireOpenUnit(double beta, const char* what) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument(std::string(what) + ": beta must lie in (0, 1)");
  }
}

// Chernoff objective (T F((lambda + lambda^2) / 2) + log_term) / lambda,
// with u = nu (lambda + lambda^2) so that F = (4u^2 + u/2) / (1 - u).
double ChernoffObjective(double lambda, std::int64_t steps, double nu,
                         double log_term) {
  const double u = nu * (lambda + lambda * lambda);
  if (!(u < 1.0)) return kInf;
  const double f = (4.0 * u * u + 0.5 * u) / (1.0 - u);
  return (static_cast<double>(steps) * f + log_term) / lambda;
}

ScalarMinimum MinimizeChernoff(std::int64_t steps, double nu,
                               double log_term) {
  const double r = LambdaDomain(nu);
  const double lo = std::numeric_limits<double>::epsilon() * r;
  const double hi = (1.0 - 1e-9) * r;
  return MinimizeLogGridThenGolden(
      [&](double lambda) {
        return ChernoffObjective(lambda, steps, nu, log_term);
      },
      lo, hi);
}

}  // namespace

void TrainingRecipe::Validate() const {
  if (epochs < 1 || steps_per_epoch < 1 || batch_size < 1) {
    throw std::invalid_argument("recipe: epochs, steps and batch size must be >= 1");
  }
  if (!(clip_threshold >= 0.0) || std::isnan(clip_threshold)) {
    throw std::invalid_argument("recipe: clip threshold must be >= 0");
  }
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) {
    throw std::invalid_argument("recipe: noise scale must be positive and finite");
  }
  if (dataset_size < 1 || dataset_size / steps_per_epoch < batch_size) {
    throw std::invalid_argument(
        "recipe: dataset size " + std::to_string(dataset_size) +
        " is smaller than steps * batch size");
  }
}

NoiseRatio NoiseRatio::Of(double nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("noise ratio must be finite and >= 0");
  }
  return {nu, nu == 0.0 ? kInf : LambdaDomain(nu)};
}

NoiseRatio NoiseRatio::Of(const TrainingRecipe& recipe) {
  const double ratio = recipe.clip_threshold / recipe.noise_scale;
  return Of(static_cast<double>(recipe.batch_size) * ratio * ratio);
}

std::string_view BoundMethodName(BoundMethod method) {
  switch (method) {
    case BoundMethod::kOptimized:
      return "optimized";
    case BoundMethod::kExplicit:
      return "explicit";
    case BoundMethod::kGaussianSingle:
      return "gaussian-single";
    case BoundMethod::kPureDp:
      return "pure-dp";
    case BoundMethod::kTauClosedForm:
      return "tau-closed-form";
    case BoundMethod::kDataIndependent:
      return "data-independent";
  }
  return "unknown";
}

BoundMethod ParseBoundMethod(std::string_view name) {
  for (BoundMethod m :
       {BoundMethod::kOptimized, BoundMethod::kExplicit,
        BoundMethod::kGaussianSingle, BoundMethod::kPureDp,
        BoundMethod::kTauClosedForm, BoundMethod::kDataIndependent}) {
    if (BoundMethodName(m) == name) return m;
  }
  throw std::invalid_argument("unknown bound method '" + std::string(name) + "'");
}

double BernsteinF(double x, double nu) {
  if (!(nu >= 0.0) || !(x >= 0.0)) {
    throw std::invalid_argument("BernsteinF: need x >= 0 and nu >= 0");
  }
  if (nu == 0.0) return 0.0;
  const double denom = 1.0 - 2.0 * nu * x;
  if (!(denom > 0.0)) {
    throw DomainError("BernsteinF: x must be below 1/(2 nu)");
  }
  return (16.0 * nu * nu * x * x + nu * x) / denom;
}

double LambdaDomain(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("LambdaDomain: nu must be positive and finite");
  }
  const double inv = 1.0 / nu;
  return inv / (std::sqrt(inv + 0.25) + 0.5);
}

MaxInfoBound MaxInfoDpsgdOptimized(const TrainingRecipe& recipe, double beta) {
  recipe.Validate();
  RequireOpenUnit(beta, "MaxInfoDpsgdOptimized");
  MaxInfoBound bound{0.0, beta, BoundMethod::kOptimized, recipe, std::nullopt};
  const double nu = NoiseRatio::Of(recipe).nu;
  if (nu == 0.0) return bound;

  const double epochs = static_cast<double>(recipe.epochs);
  const double log_term = std::log(epochs) - std::log(beta);
  const ScalarMinimum inner =
      MinimizeChernoff(recipe.steps_per_epoch, nu, log_term);
  if (!std::isfinite(inner.value)) {
    throw DomainError("MaxInfoDpsgdOptimized: no feasible lambda");
  }
  bound.value =
      0.5 * epochs * static_cast<double>(recipe.steps_per_epoch) * nu +
      epochs * inner.value;
  bound.minimizer = inner.argmin;
  return bound;
}

MaxInfoBound MaxInfoDpsgdExplicit(const TrainingRecipe& recipe, double beta) {
  recipe.Validate();
  RequireOpenUnit(beta, "MaxInfoDpsgdExplicit");
  const double epochs = static_cast<double>(recipe.epochs);
  if (!(epochs / beta > 1.0)) {
    throw std::invalid_argument("MaxInfoDpsgdExplicit: need E / beta > 1");
  }
  const double steps = static_cast<double>(recipe.steps_per_epoch);
  const double m = static_cast<double>(recipe.batch_size);
  const double ratio = recipe.clip_threshold / recipe.noise_scale;
  const double q = std::sqrt(2.0 / steps * std::log(epochs / beta));
  const double quadratic = epochs * steps * m * ratio * ratio *
                           (1.0 + 3.0 * q + 0.5 * q * q);
  const double linear = epochs * steps * std::sqrt(m) * ratio *
                        (0.5 + 3.0 * q + 0.5 * q * q);
  return {quadratic + linear, beta, BoundMethod::kExplicit, recipe, std::nullopt};
}

MaxInfoBound MaxInfoGaussianMechanism(std::int64_t m, double sensitivity,
                                      double sigma, double beta) {
  if (m < 1) throw std::invalid_argument("MaxInfoGaussianMechanism: m >= 1");
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw std::invalid_argument("MaxInfoGaussianMechanism: sensitivity > 0");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("MaxInfoGaussianMechanism: sigma > 0");
  }
  RequireOpenUnit(beta, "MaxInfoGaussianMechanism");

  // Both 1/alpha >= beta - 1/2 and q^2 >= log(alpha) reduce to
  // alpha (beta - 1/2) <= 1. The boundary itself is feasible.
  double alpha_hi = kAlphaHi;
  if (beta > 0.5) alpha_hi = std::min(alpha_hi, 1.0 / (beta - 0.5));
  if (!(alpha_hi > kAlphaLo)) {
    throw DomainError("MaxInfoGaussianMechanism: empty feasible alpha set");
  }
  const double snr = std::sqrt(static_cast<double>(m)) * sensitivity / sigma;
  auto objective = [&](double alpha) {
    const double q2 = std::log((1.0 + 0.5 * alpha) / beta);
    const double q = std::sqrt(q2);
    // q^2 - log(alpha), written to avoid cancellation at the boundary.
    const double slack = std::max(0.0, std::log((1.0 / alpha + 0.5) / beta));
    return snr * snr * (0.75 + 0.5 * q + 0.25 * q2) +
           snr * (1.0 + q) * std::sqrt(slack);
  };
  const ScalarMinimum best =
      MinimizeLogGridThenGolden(objective, kAlphaLo, alpha_hi);
  return {best.value, beta, BoundMethod::kGaussianSingle, std::nullopt,
          best.argmin};
}

MaxInfoBound MaxInfoPureDp(std::int64_t n, double epsilon, double beta) {
  if (n < 1) throw std::invalid_argument("MaxInfoPureDp: n >= 1");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("MaxInfoPureDp: epsilon >= 0");
  }
  RequireOpenUnit(beta, "MaxInfoPureDp");
  const double nd = static_cast<double>(n);
  const double value = 0.5 * nd * epsilon * epsilon +
                       epsilon * std::sqrt(0.5 * nd * std::log(2.0 / beta));
  return {value, beta, BoundMethod::kPureDp, std::nullopt, std::nullopt};
}

double GaussianSigmaForDp(double sensitivity, double epsilon, double delta) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw std::invalid_argument("GaussianSigmaForDp: sensitivity > 0");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("GaussianSigmaForDp: epsilon must lie in (0, 1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("GaussianSigmaForDp: delta must lie in (0, 1)");
  }
  return sensitivity / epsilon * std::sqrt(2.0 * std::log(1.25 / delta));
}

double RatioR(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 3.0)) {
    throw std::invalid_argument("RatioR: alpha must lie in (0, 3]");
  }
  if (!(beta > 0.0 && beta <= 0.5)) {
    throw std::invalid_argument("RatioR: beta must lie in (0, 1/2]");
  }
  const double l = std::log((1.0 + 0.5 * alpha) / beta);
  return (0.75 + 0.5 * std::sqrt(l) + 0.25 * l) / std::log(1.25 / beta);
}

ScalarMinimum TauOptimized(std::int64_t steps, double nu, double beta) {
  if (steps < 1) throw std::invalid_argument("TauOptimized: steps >= 1");
  RequireOpenUnit(beta, "TauOptimized");
  const NoiseRatio ratio = NoiseRatio::Of(nu);
  if (ratio.nu == 0.0) return {0.0, 0.0};
  return MinimizeChernoff(steps, ratio.nu, -std::log(beta));
}

double TauClosedForm(std::int64_t steps, double nu, double beta) {
  if (steps < 1) throw std::invalid_argument("TauClosedForm: steps >= 1");
  RequireOpenUnit(beta, "TauClosedForm");
  const NoiseRatio ratio = NoiseRatio::Of(nu);
  const double t = static_cast<double>(steps);
  const double q = std::sqrt(2.0 / t * -std::log(beta));
  return t * (ratio.nu + std::min(1.0, std::sqrt(ratio.nu))) *
         (0.5 + 3.0 * q + 0.5 * q * q);
}

double RelaxedTauObjective(double u, double log_term_per_step) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("RelaxedTauObjective: u must lie in (0, 1)");
  }
  return -4.0 + 9.0 / (2.0 * (1.0 - u)) + log_term_per_step / u;
}

double RelaxedTauMinimizer(double log_term_per_step) {
  if (!(log_term_per_step > 0.0)) {
    throw std::invalid_argument("RelaxedTauMinimizer: L must be positive");
  }
  const double s = std::sqrt(2.0 * log_term_per_step);
  return s / (3.0 + s);
}

}  // namespace dpcert
