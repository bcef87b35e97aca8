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

// Binary-KL arithmetic, kl-inversion, diagonal-Gaussian KL divergence and
// PAC-Bayes risk certificates for priors learned with DP-SGD.

#ifndef DPCERT_PAC_BAYES_H_
#define DPCERT_PAC_BAYES_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "dpcert/bounds.h"

namespace dpcert {

// kl(q || p) between Bernoulli(q) and Bernoulli(p), with 0 log 0 = 0.
// Returns +infinity when p is 0 or 1 and q differs from it. Throws
// std::invalid_argument outside [0, 1].
double BinaryKl(double q, double p);

// Largest p in [q, 1] with kl(q || p) <= b, found by bisection run to
// double resolution (at most 200 halvings). Returns exactly q when b == 0
// and exactly 1 when b >= kl(q || 1 - kKlInverseSaturation).
inline constexpr double kKlInverseSaturation = 1e-7;
double KlInverse(double q, double b);

// min(1, q + sqrt(b / 2)), the Pinsker relaxation of KlInverse.
double PinskerGap(double q, double b);

// Diagonal Gaussian over parameter vectors.
struct StochasticModel {
  std::vector<double> mean;
  std::vector<double> variance;  // per coordinate, strictly positive

  static StochasticModel Isotropic(std::vector<double> mean, double variance);

  std::size_t dim() const { return mean.size(); }
  // Throws std::invalid_argument on length mismatch or a non-positive or
  // non-finite variance.
  void Validate() const;

  bool operator==(const StochasticModel&) const = default;
};

// D_KL(posterior || prior) in nats.
double GaussianKl(const StochasticModel& posterior,
                  const StochasticModel& prior);

// (kl + kappa + log(4 sqrt(n) / delta)) / n, delta in (0, 1].
double PacBayesRhs(double kl_divergence, double kappa, std::int64_t n,
                   double delta);

enum class RiskKind { kExact, kMonteCarlo };
std::string_view RiskKindName(RiskKind kind);

struct RiskEstimate {
  double value = 0.0;  // in [0, 1]
  std::int64_t num_samples = 1;
  RiskKind kind = RiskKind::kExact;
};

// KlInverse(mean_risk, log(2 sqrt(N) / delta_prime) / N): upper bound on the
// expected empirical risk from N Monte-Carlo draws, valid w.p. 1 - delta'.
double McEriskUpper(double mean_risk, std::int64_t num_samples,
                    double delta_prime);

struct ConfidenceSplit {
  double delta = 0.05;
  double delta_prime = 0.0125;
  double beta = 0.025;

  // delta - delta' - beta, the denominator of the union-bound log term.
  double UnionSlack() const { return delta - delta_prime - beta; }
  // Throws std::invalid_argument unless each value lies in (0, 1),
  // delta + delta' < 1 and UnionSlack() > 0.
  void Validate() const;
};

// K1 DP-SGD hyperparameter tuples times K2 prior variances.
struct GridSizes {
  std::int64_t k1 = 1;
  std::int64_t k2 = 1;
};

struct RiskCertificate {
  double empirical_risk = 0.0;        // the point estimate it started from
  double empirical_risk_upper = 0.0;  // after the Monte-Carlo correction
  double kl_divergence = 0.0;
  MaxInfoBound kappa;
  std::int64_t n = 1;
  ConfidenceSplit split;
  GridSizes grid;
  double complexity = 0.0;        // the kl budget handed to KlInverse
  double risk_upper_bound = 1.0;  // B, rounded up at kCertificateGranularity
  double failure_probability = 0.0;  // delta + delta'
};

inline constexpr double kCertificateGranularity = 1e-9;

// Smallest multiple of `granularity` that is >= x, capped at 1.
double RoundUp(double x, double granularity = kCertificateGranularity);

// log(2 K1 K2 sqrt(n) / (delta - delta' - beta)).
double UnionBoundLogTerm(std::int64_t n, const ConfidenceSplit& split,
                         const GridSizes& grid);

// B = KlInverse(R_hat, (kl + kappa + UnionBoundLogTerm) / n) where R_hat is
// McEriskUpper(erisk) for Monte-Carlo estimates and the value itself for
// exact ones. kappa must have been computed at failure budget beta / K1.
RiskCertificate UnionBoundCertificate(const RiskEstimate& erisk,
                                      double kl_divergence,
                                      const MaxInfoBound& kappa,
                                      std::int64_t n,
                                      const ConfidenceSplit& split,
                                      const GridSizes& grid);

// KlInverse(erisk, PacBayesRhs(kl, kappa, n, delta)).
double PacBayesRiskBound(double erisk, double kl_divergence, double kappa,
                         std::int64_t n, double delta);

}  // namespace dpcert

#endif  // DPCERT_PAC_BAYES_H_
