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

#include "dpcert/dpsgd.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "dpcert/errors.h"
#include "dpcert/parallel.h"
#include "dpcert/rng.h"

namespace dpcert {
namespace {

// Plain sum of squares, with a rescaled fallback when it overflows or
// underflows.
double L2Norm(std::span<const double> v) {
  double plain = 0.0;
  for (double x : v) plain += x * x;
  if (std::isfinite(plain) && plain > 1e-290) return std::sqrt(plain);
  double big = 0.0;
  for (double x : v) big = std::max(big, std::abs(x));
  if (big == 0.0 || !std::isfinite(big)) return big;
  double s = 0.0;
  for (double x : v) s += (x / big) * (x / big);
  return big * std::sqrt(s);
}

// Per-sample work below this many gradient entries runs on one thread.
constexpr std::size_t kParallelThreshold = 1 << 15;

struct Engine {
  std::int64_t n;
  const TrainingRecipe& recipe;
  const UpdateRule& rule;
  const PerSampleGradient& gradient;
  std::uint64_t seed;

  template <typename Sink>
  std::vector<double> Run(std::vector<double> theta, Sink&& sink) const {
    ValidateTrainingRecipe(recipe);
    if (n != recipe.dataset_size) {
      throw std::invalid_argument("dataset has " + std::to_string(n) +
                                  " samples, recipe says " +
                                  std::to_string(recipe.dataset_size));
    }
    rule.Validate(recipe.steps_per_epoch);
    if (theta.empty()) throw std::invalid_argument("theta_0 is empty");
    const std::size_t d = theta.size();
    const std::size_t m = static_cast<std::size_t>(recipe.batch_size);
    const Rng root(seed);
    const Rng shuffle = root.Split("shuffle");
    Rng noise_rng = root.Split("noise");

    UpdateState state;
    std::vector<double> per_sample(m * d);
    std::vector<double> norms(m);
    std::vector<double> u(d), z(d);
    std::int64_t global = 0;
    for (std::int64_t e = 0; e < recipe.epochs; ++e) {
      BatchPlan plan = CreateBatches(n, recipe.batch_size,
                                     recipe.steps_per_epoch,
                                     shuffle.Split(e).key());
      for (std::int64_t t = 0; t < recipe.steps_per_epoch; ++t) {
        ++global;
        const std::vector<std::int64_t>& batch = plan.batches[t];
        auto one = [&](std::size_t k) {
          std::span<double> g(per_sample.data() + k * d, d);
          std::fill(g.begin(), g.end(), 0.0);
          if (recipe.clip_threshold == 0.0) {
            norms[k] = 0.0;
            return;
          }
          gradient(batch[k], theta, g);
          norms[k] = ClipInPlace(g, recipe.clip_threshold);
        };
        if (m * d >= kParallelThreshold) {
          ParallelFor(m, one);
        } else {
          for (std::size_t k = 0; k < m; ++k) one(k);
        }
        std::fill(u.begin(), u.end(), 0.0);
        for (std::size_t k = 0; k < m; ++k) {
          const double* g = per_sample.data() + k * d;
          for (std::size_t i = 0; i < d; ++i) u[i] += g[i];
        }
        for (std::size_t i = 0; i < d; ++i) {
          z[i] = noise_rng.Normal();
          u[i] += recipe.noise_scale * z[i];
        }
        GradientUpdate(rule, state, theta, u, rule.LearningRate(t));
        for (double v : theta) {
          if (!std::isfinite(v)) {
            throw TrainingError("non-finite parameters after step " +
                                std::to_string(global) + " (epoch " +
                                std::to_string(e) + ")");
          }
        }
        StepRecord record;
        record.epoch = e;
        record.step_in_epoch = t;
        record.global_step = global;
        record.batch = batch;
        record.theta = theta;
        record.update = u;
        record.noise = z;
        record.max_clipped_norm = *std::max_element(norms.begin(), norms.end());
        sink(record, plan);
      }
    }
    return theta;
  }
};

}  // namespace

double ClipInPlace(std::span<double> g, double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("clip threshold must be > 0");
  for (double x : g) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("cannot clip a vector with non-finite entries");
    }
  }
  double norm = L2Norm(g);
  if (norm <= zeta) return norm;
  double scale = zeta / norm;
  std::vector<double> original(g.begin(), g.end());
  while (true) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = original[i] * scale;
    norm = L2Norm(g);
    if (norm <= zeta) return norm;
    scale = std::nextafter(scale, 0.0);
  }
}

std::vector<double> Clip(std::span<const double> g, double zeta) {
  std::vector<double> out(g.begin(), g.end());
  ClipInPlace(out, zeta);
  return out;
}

BatchPlan CreateBatches(std::int64_t n, std::int64_t m, std::int64_t steps,
                        std::uint64_t seed) {
  if (n < 1 || m < 1 || steps < 1) {
    throw std::invalid_argument("CreateBatches: n, m and T must be >= 1");
  }
  if (n / steps < m) {
    throw std::invalid_argument("CreateBatches: T * m = " +
                                std::to_string(steps * m) + " exceeds n = " +
                                std::to_string(n));
  }
  std::vector<std::int64_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::int64_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::int64_t>(rng.Below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  BatchPlan plan;
  plan.epoch_seed = seed;
  plan.batches.resize(steps);
  for (std::int64_t t = 0; t < steps; ++t) {
    plan.batches[t].assign(perm.begin() + t * m, perm.begin() + (t + 1) * m);
  }
  return plan;
}

std::string_view UpdateKindName(UpdateKind kind) {
  switch (kind) {
    case UpdateKind::kPlain:
      return "plain";
    case UpdateKind::kMomentumWd:
      return "momentum_wd";
    case UpdateKind::kAdamLike:
      return "adam_like";
  }
  return "unknown";
}

UpdateKind ParseUpdateKind(std::string_view name) {
  for (UpdateKind k :
       {UpdateKind::kPlain, UpdateKind::kMomentumWd, UpdateKind::kAdamLike}) {
    if (UpdateKindName(k) == name) return k;
  }
  throw std::invalid_argument("unknown update rule '" + std::string(name) + "'");
}

double UpdateRule::LearningRate(std::int64_t step_in_epoch) const {
  if (learning_rates.size() == 1) return learning_rates[0];
  return learning_rates.at(step_in_epoch);
}

void UpdateRule::Validate(std::int64_t steps_per_epoch) const {
  if (learning_rates.size() != 1 &&
      learning_rates.size() != static_cast<std::size_t>(steps_per_epoch)) {
    throw std::invalid_argument("need 1 or T = " +
                                std::to_string(steps_per_epoch) +
                                " learning rates, got " +
                                std::to_string(learning_rates.size()));
  }
  for (double eta : learning_rates) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
      throw std::invalid_argument("learning rates must be positive and finite");
    }
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0 && weight_decay < 1.0)) {
    throw std::invalid_argument("weight decay must lie in [0, 1)");
  }
  if (!(second_moment >= 0.0 && second_moment < 1.0)) {
    throw std::invalid_argument("second-moment decay must lie in [0, 1)");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("adam epsilon must be positive");
  }
}

void GradientUpdate(const UpdateRule& rule, UpdateState& state,
                    std::span<double> theta, std::span<const double> update,
                    double eta) {
  if (theta.size() != update.size()) {
    throw std::invalid_argument("update and parameters differ in length");
  }
  const std::size_t d = theta.size();
  ++state.step;
  switch (rule.kind) {
    case UpdateKind::kPlain:
      for (std::size_t i = 0; i < d; ++i) theta[i] -= eta * update[i];
      return;
    case UpdateKind::kMomentumWd: {
      state.first_moment.resize(d, 0.0);
      const double b1 = rule.momentum;
      for (std::size_t i = 0; i < d; ++i) {
        double& mi = state.first_moment[i];
        mi = b1 * mi + (1.0 - b1) * update[i];
        theta[i] = (1.0 - rule.weight_decay) * theta[i] - eta * mi;
      }
      return;
    }
    case UpdateKind::kAdamLike: {
      state.first_moment.resize(d, 0.0);
      state.second_moment.resize(d, 0.0);
      const double b1 = rule.momentum, b2 = rule.second_moment;
      const double t = static_cast<double>(state.step);
      const double c1 = 1.0 - std::pow(b1, t);
      const double c2 = 1.0 - std::pow(b2, t);
      for (std::size_t i = 0; i < d; ++i) {
        double& mi = state.first_moment[i];
        double& vi = state.second_moment[i];
        mi = b1 * mi + (1.0 - b1) * update[i];
        vi = b2 * vi + (1.0 - b2) * update[i] * update[i];
        theta[i] -= eta * (mi / c1) / (std::sqrt(vi / c2) + rule.epsilon);
      }
      return;
    }
  }
}

void ValidateTrainingRecipe(const TrainingRecipe& recipe) {
  if (recipe.epochs < 1 || recipe.steps_per_epoch < 1 || recipe.batch_size < 1) {
    throw std::invalid_argument("recipe: epochs, steps and batch size must be >= 1");
  }
  if (!(recipe.clip_threshold >= 0.0)) {
    throw std::invalid_argument("recipe: clip threshold must be >= 0");
  }
  if (!(recipe.noise_scale >= 0.0) || !std::isfinite(recipe.noise_scale)) {
    throw std::invalid_argument("recipe: noise scale must be finite and >= 0");
  }
  if (recipe.dataset_size / recipe.steps_per_epoch < recipe.batch_size) {
    throw std::invalid_argument("recipe: dataset size is smaller than T * m");
  }
}

TrainTrace DpsgdStream(std::int64_t n, const TrainingRecipe& recipe,
                       const UpdateRule& rule,
                       const PerSampleGradient& gradient,
                       std::vector<double> theta0, std::uint64_t seed,
                       const StepCallback& on_step) {
  TrainTrace trace;
  trace.theta0 = theta0;
  trace.seed = seed;
  const Engine engine{n, recipe, rule, gradient, seed};
  engine.Run(std::move(theta0), [&](const StepRecord& r, BatchPlan& plan) {
    if (r.step_in_epoch + 1 == recipe.steps_per_epoch) {
      trace.plans.push_back(plan);
    }
    trace.thetas.emplace_back(r.theta.begin(), r.theta.end());
    trace.updates.emplace_back(r.update.begin(), r.update.end());
    trace.noises.emplace_back(r.noise.begin(), r.noise.end());
    trace.max_clipped_norms.push_back(r.max_clipped_norm);
    if (on_step) on_step(r);
  });
  return trace;
}

std::vector<double> DpsgdBatch(std::int64_t n, const TrainingRecipe& recipe,
                               const UpdateRule& rule,
                               const PerSampleGradient& gradient,
                               std::vector<double> theta0, std::uint64_t seed) {
  const Engine engine{n, recipe, rule, gradient, seed};
  return engine.Run(std::move(theta0), [](const StepRecord&, BatchPlan&) {});
}

}  // namespace dpcert
