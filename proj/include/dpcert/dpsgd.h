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

// Differentially private SGD: per-sample clipping, fixed-size disjoint
// batches drawn from a per-epoch shuffle, Gaussian noise on the summed
// clipped gradients, and a choice of update rules.
//
// Randomness: with root generator Rng(seed), the shuffle of epoch e uses
// Split("shuffle").Split(e) and all noise is drawn in step order from
// Split("noise").

#ifndef DPCERT_DPSGD_H_
#define DPCERT_DPSGD_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "dpcert/bounds.h"

namespace dpcert {

// g * min(1, zeta / ||g||). zeta = +infinity disables clipping. The output
// norm never exceeds zeta. Throws std::invalid_argument on non-finite
// components or zeta <= 0.
std::vector<double> Clip(std::span<const double> g, double zeta);
// In-place variant; returns the norm after clipping.
double ClipInPlace(std::span<double> g, double zeta);

struct BatchPlan {
  std::vector<std::vector<std::int64_t>> batches;  // T sets of m indices
  std::uint64_t epoch_seed = 0;
};

// Uniform permutation of [0, n) (Fisher-Yates driven by Rng(seed)); the
// first T * m entries are cut into T consecutive blocks of m. Never looks
// at data. Throws std::invalid_argument if T * m > n.
BatchPlan CreateBatches(std::int64_t n, std::int64_t m, std::int64_t steps,
                        std::uint64_t seed);

enum class UpdateKind { kPlain, kMomentumWd, kAdamLike };
std::string_view UpdateKindName(UpdateKind kind);
UpdateKind ParseUpdateKind(std::string_view name);

struct UpdateRule {
  UpdateKind kind = UpdateKind::kPlain;
  // eta_1..eta_T for the steps of an epoch; a single entry is used for
  // every step.
  std::vector<double> learning_rates{0.01};
  double momentum = 0.9;         // beta_1, momentum_wd and adam_like
  double weight_decay = 0.0;     // alpha_wd, momentum_wd only
  double second_moment = 0.999;  // beta_2, adam_like only
  double epsilon = 1e-8;         // adam_like only

  // eta for step `step_in_epoch` (0-based).
  double LearningRate(std::int64_t step_in_epoch) const;
  void Validate(std::int64_t steps_per_epoch) const;
};

struct UpdateState {
  std::vector<double> first_moment;   // m_t
  std::vector<double> second_moment;  // v_t
  std::int64_t step = 0;              // number of updates applied
};

// Applies one update in place:
//   plain:       theta -= eta u
//   momentum_wd: m = b1 m + (1 - b1) u;  theta = (1 - wd) theta - eta m
//   adam_like:   m, v updated with u and u*u, bias-corrected by 1 - b^t,
//                theta -= eta m_hat / (sqrt(v_hat) + eps)
void GradientUpdate(const UpdateRule& rule, UpdateState& state,
                    std::span<double> theta, std::span<const double> update,
                    double eta);

// Writes the gradient of the per-sample loss at `theta` for sample `index`.
using PerSampleGradient = std::function<void(
    std::int64_t index, std::span<const double> theta, std::span<double> grad)>;

struct StepRecord {
  std::int64_t epoch = 0;          // 0-based
  std::int64_t step_in_epoch = 0;  // 0-based
  std::int64_t global_step = 0;    // 1-based, t in 1..E*T
  std::span<const std::int64_t> batch;
  std::span<const double> theta;   // theta_t after the update
  std::span<const double> update;  // u_t
  std::span<const double> noise;   // z_t, standard normal
  double max_clipped_norm = 0.0;   // largest per-sample norm after clipping
};
using StepCallback = std::function<void(const StepRecord&)>;

struct TrainTrace {
  std::vector<double> theta0;
  std::vector<BatchPlan> plans;                 // one per epoch
  std::vector<std::vector<double>> thetas;      // theta_1..theta_{E T}
  std::vector<std::vector<double>> updates;     // u_1..u_{E T}
  std::vector<std::vector<double>> noises;      // z_1..z_{E T}
  std::vector<double> max_clipped_norms;
  std::uint64_t seed = 0;
};

// Training-side recipe check: like TrainingRecipe::Validate but admits
// sigma = 0 and zeta = +infinity (plain mini-batch SGD).
void ValidateTrainingRecipe(const TrainingRecipe& recipe);

// Streaming DP-SGD. After every step the callback (if any) sees the new
// parameters; the returned trace holds every step. Throws TrainingError if
// the parameters become non-finite.
TrainTrace DpsgdStream(std::int64_t n, const TrainingRecipe& recipe,
                       const UpdateRule& rule,
                       const PerSampleGradient& gradient,
                       std::vector<double> theta0, std::uint64_t seed,
                       const StepCallback& on_step = {});

// Same computation as DpsgdStream, keeping only theta_{E T}.
std::vector<double> DpsgdBatch(std::int64_t n, const TrainingRecipe& recipe,
                               const UpdateRule& rule,
                               const PerSampleGradient& gradient,
                               std::vector<double> theta0, std::uint64_t seed);

}  // namespace dpcert

#endif  // DPCERT_DPSGD_H_
