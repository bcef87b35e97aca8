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

// Risk-certificate pipeline: DP-SGD priors, Gaussian posteriors optimized
// against a PAC-Bayes objective, and the union-bound sweep over training
// recipes and prior variances.

#ifndef DPCERT_CERTIFY_H_
#define DPCERT_CERTIFY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpcert/bounds.h"
#include "dpcert/dpsgd.h"
#include "dpcert/models.h"
#include "dpcert/pac_bayes.h"

namespace dpcert {

enum class PriorKind { kDpsgd, kDataIndependent };
std::string_view PriorKindName(PriorKind kind);

// One entry of the recipe grid. dataset_size is overwritten with the size
// of the dataset the pipeline runs on.
struct RecipeSpec {
  TrainingRecipe recipe;
  UpdateRule rule;
};

struct PosteriorBudget {
  std::int64_t steps = 100;
  double learning_rate = 0.05;
  std::int64_t draws_per_step = 8;
  int max_halvings = 30;
};

struct PipelineConfig {
  ModelSpec model;
  BoundedLoss train_loss;  // surrogate for posterior optimization
  double init_scale = 1.0;
  std::vector<RecipeSpec> recipes;      // K1 entries
  std::vector<double> prior_variances;  // tau grid, K2 entries
  ConfidenceSplit split;
  PosteriorBudget budget;
  std::int64_t final_draws = 2000;  // N
  std::uint64_t seed = 0;
  bool data_independent_baseline = true;

  // Throws std::invalid_argument on empty grids, non-positive variances,
  // an invalid split or budget. Recipes are checked per cell.
  void Validate() const;
};

// theta_0 shared by both prior kinds: InitialParameters under the
// substream Rng(seed).Split("init").
std::vector<double> PipelineInit(const PipelineConfig& config);

// Mean = DP-SGD output started from `theta0` with the given training seed,
// variance = tau in every coordinate.
StochasticModel BuildDpsgdPrior(const ModelSpec& spec, const Dataset& data,
                                const BoundedLoss& loss,
                                const RecipeSpec& recipe,
                                std::vector<double> theta0, double tau,
                                std::uint64_t seed);

// Mean = theta0, variance = tau.
StochasticModel BuildDataIndependentPrior(std::vector<double> theta0,
                                          double tau);

// Surrogate risk + sqrt((KL(rho || prior) + kappa + log_term) / (2 n)),
// with the risk averaged over a fixed set of reparameterized draws.
struct PosteriorObjective {
  double risk = 0.0;
  double kl = 0.0;
  double penalty = 0.0;
  double value = 0.0;
};

// The objective at (mean, log variance) over the draws OptimizePosterior
// uses for the same seed and draw count, with its gradient when the output
// vectors are non-null.
PosteriorObjective PosteriorObjectiveAt(
    const ModelSpec& spec, const Dataset& data, const BoundedLoss& loss,
    const StochasticModel& prior, double kappa, const ConfidenceSplit& split,
    const GridSizes& grid, std::int64_t draws, std::uint64_t seed,
    const std::vector<double>& mean, const std::vector<double>& log_variance,
    std::vector<double>* grad_mean = nullptr,
    std::vector<double>* grad_log_variance = nullptr);

struct PosteriorResult {
  StochasticModel posterior;
  // Objective after 0, 1, ... accepted steps; nonincreasing.
  std::vector<double> objective_trace;
  PosteriorObjective final_objective;
  std::int64_t accepted_steps = 0;
  std::int64_t halvings = 0;
};

// Gradient descent on (mean, log variance) from rho = prior, halving the
// step until the objective does not increase; gives up on a step after
// budget.max_halvings halvings. The draws are fixed for the whole run, so
// the objective is a deterministic function of rho. A trial step with a
// non-finite objective is halved like any other increase; TrainingError is
// thrown when the objective at the prior itself is not finite.
PosteriorResult OptimizePosterior(const ModelSpec& spec, const Dataset& data,
                                  const BoundedLoss& loss,
                                  const StochasticModel& prior, double kappa,
                                  const ConfidenceSplit& split,
                                  const GridSizes& grid,
                                  const PosteriorBudget& budget,
                                  std::uint64_t seed);

struct CellResult {
  PriorKind prior_kind = PriorKind::kDpsgd;
  std::int64_t recipe_index = 0;  // -1 for the data-independent prior
  std::int64_t variance_index = 0;
  double tau = 0.0;
  bool ok = false;
  std::string error;
  RiskEstimate prior_risk;             // zero-one, N draws from the prior
  RiskCertificate prior_certificate;   // rho = prior
  RiskEstimate posterior_risk;         // zero-one, N draws from rho
  RiskCertificate certificate;
  PosteriorResult posterior;
};

struct SweepResult {
  PriorKind prior_kind = PriorKind::kDpsgd;
  GridSizes grid;
  std::vector<MaxInfoBound> kappas;  // one per recipe, at beta / K1
  std::vector<CellResult> cells;
  std::optional<std::size_t> best;   // index into cells, smallest B
};

struct PipelineResult {
  std::vector<SweepResult> sweeps;  // DP-SGD sweep, then the baseline
};

// Runs the DP-SGD sweep and, if configured, the data-independent baseline
// (K1 = 1, kappa = 0). Each sweep pays its own union bound, so each
// selected certificate holds with probability 1 - delta - delta'. Cell
// failures are recorded and the remaining cells still run.
PipelineResult RunPipeline(const PipelineConfig& config, const Dataset& data);

// One row per sweep with a successful cell, in the shape of the usual
// prior-vs-posterior comparison table.
struct SummaryRow {
  PriorKind prior_kind = PriorKind::kDpsgd;
  double prior_risk = 0.0;        // R_hat(pi)
  double prior_bound = 1.0;       // B(pi)
  double posterior_risk = 0.0;    // R_hat(rho)
  double kappa = 0.0;
  double kl = 0.0;
  double posterior_bound = 1.0;   // B(rho)
  std::int64_t recipe_index = 0;
  double tau = 0.0;
};

std::vector<SummaryRow> Summarize(const PipelineResult& result);

}  // namespace dpcert

#endif  // DPCERT_CERTIFY_H_
