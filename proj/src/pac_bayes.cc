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
#include <stdexcept>
#include <string>
#include <utility>

namespace dpcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void RequireUnitClosed(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

void RequireUnitOpen(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
  }
}

// x log(x / y) with 0 log 0 = 0.
double XLogXOverY(double x, double y) {
  if (x == 0.0) return 0.0;
  if (y == 0.0) return kInf;
  return x * std::log(x / y);
}

}  // namespace

double BinaryKl(double q, double p) {
  RequireUnitClosed(q, "BinaryKl: q");
  RequireUnitClosed(p, "BinaryKl: p");
  const double v = XLogXOverY(q, p) + XLogXOverY(1.0 - q, 1.0 - p);
  return v > 0.0 ? v : 0.0;
}

double KlInverse(double q, double b) {
  RequireUnitClosed(q, "KlInverse: q");
  if (!(b >= 0.0)) throw std::invalid_argument("KlInverse: b must be >= 0");
  if (b == 0.0 || q == 1.0) return q;
  const double cap = 1.0 - kKlInverseSaturation;
  if (q >= cap || BinaryKl(q, cap) <= b) return 1.0;

  double lo = q;   // kl(q || lo) <= b
  double hi = cap;  // kl(q || hi) > b
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (BinaryKl(q, mid) <= b) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double PinskerGap(double q, double b) {
  RequireUnitClosed(q, "PinskerGap: q");
  if (!(b >= 0.0)) throw std::invalid_argument("PinskerGap: b must be >= 0");
  return std::min(1.0, q + std::sqrt(0.5 * b));
}

StochasticModel StochasticModel::Isotropic(std::vector<double> mean,
                                           double variance) {
  StochasticModel model;
  model.variance.assign(mean.size(), variance);
  model.mean = std::move(mean);
  model.Validate();
  return model;
}

void StochasticModel::Validate() const {
  if (mean.size() != variance.size()) {
    throw std::invalid_argument("StochasticModel: mean has " +
                                std::to_string(mean.size()) +
                                " coordinates, variance has " +
                                std::to_string(variance.size()));
  }
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(variance[i] > 0.0) || !std::isfinite(variance[i]) ||
        !std::isfinite(mean[i])) {
      throw std::invalid_argument("StochasticModel: coordinate " +
                                  std::to_string(i) +
                                  " has non-finite mean or variance <= 0");
    }
  }
}

double GaussianKl(const StochasticModel& posterior,
                  const StochasticModel& prior) {
  posterior.Validate();
  prior.Validate();
  if (posterior.dim() != prior.dim()) {
    throw std::invalid_argument("GaussianKl: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < prior.dim(); ++i) {
    const double ratio = posterior.variance[i] / prior.variance[i];
    const double diff = posterior.mean[i] - prior.mean[i];
    // ratio - 1 - log(ratio) is computed without cancellation near 1.
    const double shape = (ratio - 1.0) - std::log1p(ratio - 1.0);
    total += shape + diff * diff / prior.variance[i];
  }
  return 0.5 * total;
}

double PacBayesRhs(double kl_divergence, double kappa, std::int64_t n,
                   double delta) {
  if (!(kl_divergence >= 0.0) || !(kappa >= 0.0)) {
    throw std::invalid_argument("PacBayesRhs: kl and kappa must be >= 0");
  }
  if (n < 1) throw std::invalid_argument("PacBayesRhs: n must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("PacBayesRhs: delta must lie in (0, 1]");
  }
  const double nd = static_cast<double>(n);
  return (kl_divergence + kappa + std::log(4.0 * std::sqrt(nd) / delta)) / nd;
}

std::string_view RiskKindName(RiskKind kind) {
  return kind == RiskKind::kExact ? "exact" : "monte-carlo";
}

double McEriskUpper(double mean_risk, std::int64_t num_samples,
                    double delta_prime) {
  RequireUnitClosed(mean_risk, "McEriskUpper: mean risk");
  if (num_samples < 1) {
    throw std::invalid_argument("McEriskUpper: N must be >= 1");
  }
  RequireUnitOpen(delta_prime, "McEriskUpper: delta'");
  const double nd = static_cast<double>(num_samples);
  return KlInverse(mean_risk,
                   std::log(2.0 * std::sqrt(nd) / delta_prime) / nd);
}

void ConfidenceSplit::Validate() const {
  RequireUnitOpen(delta, "delta");
  RequireUnitOpen(delta_prime, "delta'");
  RequireUnitOpen(beta, "beta");
  if (!(delta + delta_prime < 1.0)) {
    throw std::invalid_argument("delta + delta' must be < 1");
  }
  if (!(UnionSlack() > 0.0)) {
    throw std::invalid_argument("delta - delta' - beta must be > 0");
  }
}

double RoundUp(double x, double granularity) {
  if (!(granularity > 0.0)) {
    throw std::invalid_argument("RoundUp: granularity must be positive");
  }
  if (x >= 1.0) return 1.0;
  double r = std::ceil(x / granularity) * granularity;
  while (r < x) r = std::nextafter(r, kInf);
  return std::min(1.0, r);
}

double UnionBoundLogTerm(std::int64_t n, const ConfidenceSplit& split,
                         const GridSizes& grid) {
  split.Validate();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (grid.k1 < 1 || grid.k2 < 1) {
    throw std::invalid_argument("grid sizes must be >= 1");
  }
  return std::log(2.0) + std::log(static_cast<double>(grid.k1)) +
         std::log(static_cast<double>(grid.k2)) +
         0.5 * std::log(static_cast<double>(n)) -
         std::log(split.UnionSlack());
}

RiskCertificate UnionBoundCertificate(const RiskEstimate& erisk,
                                      double kl_divergence,
                                      const MaxInfoBound& kappa,
                                      std::int64_t n,
                                      const ConfidenceSplit& split,
                                      const GridSizes& grid) {
  RequireUnitClosed(erisk.value, "empirical risk");
  if (!(kl_divergence >= 0.0) || !(kappa.value >= 0.0)) {
    throw std::invalid_argument("kl and kappa must be >= 0");
  }
  const double log_term = UnionBoundLogTerm(n, split, grid);

  RiskCertificate cert;
  cert.empirical_risk = erisk.value;
  cert.empirical_risk_upper =
      erisk.kind == RiskKind::kMonteCarlo
          ? McEriskUpper(erisk.value, erisk.num_samples, split.delta_prime)
          : erisk.value;
  cert.kl_divergence = kl_divergence;
  cert.kappa = kappa;
  cert.n = n;
  cert.split = split;
  cert.grid = grid;
  cert.complexity =
      (kl_divergence + kappa.value + log_term) / static_cast<double>(n);
  cert.risk_upper_bound =
      RoundUp(KlInverse(cert.empirical_risk_upper, cert.complexity));
  cert.failure_probability = split.delta + split.delta_prime;
  return cert;
}

double PacBayesRiskBound(double erisk, double kl_divergence, double kappa,
                         std::int64_t n, double delta) {
  return KlInverse(erisk, PacBayesRhs(kl_divergence, kappa, n, delta));
}

}  // namespace dpcert
