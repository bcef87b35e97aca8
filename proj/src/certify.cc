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

#include "dpcert/certify.h"

#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpcert/errors.h"
#include "dpcert/parallel.h"
#include "dpcert/rng.h"

namespace dpcert {

std::string_view PriorKindName(PriorKind kind) {
  switch (kind) {
    case PriorKind::kDpsgd:
      return "dpsgd";
    case PriorKind::kDataIndependent:
      return "data_independent";
  }
  return "unknown";
}

void PipelineConfig::Validate() const {
  model.Validate();
  if (recipes.empty()) {
    throw std::invalid_argument("PipelineConfig: recipe grid is empty");
  }
  if (prior_variances.empty()) {
    throw std::invalid_argument("PipelineConfig: prior variance grid is empty");
  }
  for (double tau : prior_variances) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw std::invalid_argument("PipelineConfig: prior variances must be positive");
    }
  }
  split.Validate();
  if (budget.steps < 0 || !(budget.learning_rate > 0.0) ||
      budget.draws_per_step < 1 || budget.max_halvings < 0) {
    throw std::invalid_argument("PipelineConfig: invalid posterior budget");
  }
  if (final_draws < 1) {
    throw std::invalid_argument("PipelineConfig: final_draws must be >= 1");
  }
  if (!(init_scale >= 0.0) || !(train_loss.clamp > 0.0)) {
    throw std::invalid_argument("PipelineConfig: invalid init scale or clamp");
  }
}

std::vector<double> PipelineInit(const PipelineConfig& config) {
  Rng rng = Rng(config.seed).Split("init");
  return InitialParameters(config.model, rng, config.init_scale);
}

StochasticModel BuildDpsgdPrior(const ModelSpec& spec, const Dataset& data,
                                const BoundedLoss& loss,
                                const RecipeSpec& recipe,
                                std::vector<double> theta0, double tau,
                                std::uint64_t seed) {
  TrainingRecipe r = recipe.recipe;
  r.dataset_size = data.size();
  std::vector<double> mean =
      DpsgdBatch(data.size(), r, recipe.rule, LossGradient(spec, data, loss),
                 std::move(theta0), seed);
  return StochasticModel::Isotropic(std::move(mean), tau);
}

StochasticModel BuildDataIndependentPrior(std::vector<double> theta0,
                                          double tau) {
  return StochasticModel::Isotropic(std::move(theta0), tau);
}

namespace {

struct Point {
  std::vector<double> mean;
  std::vector<double> log_variance;
};

class PosteriorProblem {
 public:
  PosteriorProblem(const ModelSpec& spec, const Dataset& data,
                   const BoundedLoss& loss, const StochasticModel& prior,
                   double constant, std::int64_t draws, std::uint64_t seed)
      : spec_(spec), data_(data), loss_(loss), prior_(prior),
        constant_(constant) {
    const std::size_t d = prior.dim();
    Rng rng(seed);
    draws_.resize(draws);
    for (std::int64_t k = 0; k < draws; ++k) {
      Rng sub = rng.Split(static_cast<std::uint64_t>(k));
      draws_[k].resize(d);
      for (double& e : draws_[k]) e = sub.Normal();
    }
  }

  // Objective at p; fills the gradient when `grad` is non-null.
  PosteriorObjective Evaluate(const Point& p, Point* grad) const {
    const std::size_t d = p.mean.size();
    const std::size_t num_draws = draws_.size();
    const std::int64_t n = data_.size();
    std::vector<double> risks(num_draws, 0.0);
    std::vector<std::vector<double>> grads(
        grad ? num_draws : 0, std::vector<double>(d, 0.0));
    ParallelFor(num_draws, [&](std::size_t k) {
      std::vector<double> theta(d), g(d), acc(d, 0.0);
      for (std::size_t c = 0; c < d; ++c) {
        theta[c] = p.mean[c] + std::exp(0.5 * p.log_variance[c]) * draws_[k][c];
      }
      double total = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        if (grad) {
          total += LossAndGradient(spec_, theta, data_.Row(i), data_.labels[i],
                                   loss_, g);
          for (std::size_t c = 0; c < d; ++c) acc[c] += g[c];
        } else {
          total += LossAndGradient(spec_, theta, data_.Row(i), data_.labels[i],
                                   loss_);
        }
      }
      risks[k] = total / static_cast<double>(n);
      if (grad) {
        for (std::size_t c = 0; c < d; ++c) grads[k][c] = acc[c] / static_cast<double>(n);
      }
    });

    PosteriorObjective obj;
    for (double r : risks) obj.risk += r;
    obj.risk /= static_cast<double>(num_draws);
    StochasticModel rho{p.mean, std::vector<double>(d)};
    for (std::size_t c = 0; c < d; ++c) rho.variance[c] = std::exp(p.log_variance[c]);
    obj.kl = GaussianKl(rho, prior_);
    obj.penalty = std::sqrt((obj.kl + constant_) / (2.0 * static_cast<double>(n)));
    obj.value = obj.risk + obj.penalty;
    if (!std::isfinite(obj.value)) return obj;
    if (grad) {
      grad->mean.assign(d, 0.0);
      grad->log_variance.assign(d, 0.0);
      const double inv_draws = 1.0 / static_cast<double>(num_draws);
      for (std::size_t k = 0; k < num_draws; ++k) {
        for (std::size_t c = 0; c < d; ++c) {
          const double g = grads[k][c] * inv_draws;
          grad->mean[c] += g;
          grad->log_variance[c] +=
              g * draws_[k][c] * 0.5 * std::exp(0.5 * p.log_variance[c]);
        }
      }
      const double dpen = obj.penalty > 0.0
                              ? 1.0 / (4.0 * static_cast<double>(n) * obj.penalty)
                              : 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double v0 = prior_.variance[c];
        grad->mean[c] += dpen * (p.mean[c] - prior_.mean[c]) / v0;
        grad->log_variance[c] += dpen * 0.5 * (rho.variance[c] / v0 - 1.0);
      }
    }
    return obj;
  }

 private:
  const ModelSpec& spec_;
  const Dataset& data_;
  const BoundedLoss& loss_;
  const StochasticModel& prior_;
  double constant_;
  std::vector<std::vector<double>> draws_;
};

}  // namespace

PosteriorObjective PosteriorObjectiveAt(
    const ModelSpec& spec, const Dataset& data, const BoundedLoss& loss,
    const StochasticModel& prior, double kappa, const ConfidenceSplit& split,
    const GridSizes& grid, std::int64_t draws, std::uint64_t seed,
    const std::vector<double>& mean, const std::vector<double>& log_variance,
    std::vector<double>* grad_mean, std::vector<double>* grad_log_variance) {
  prior.Validate();
  if (mean.size() != prior.dim() || log_variance.size() != prior.dim() ||
      draws < 1) {
    throw std::invalid_argument("PosteriorObjectiveAt: bad arguments");
  }
  const double constant = kappa + UnionBoundLogTerm(data.size(), split, grid);
  PosteriorProblem problem(spec, data, loss, prior, constant, draws, seed);
  const bool want_grad = grad_mean || grad_log_variance;
  Point grad;
  const PosteriorObjective obj =
      problem.Evaluate({mean, log_variance}, want_grad ? &grad : nullptr);
  if (grad_mean) *grad_mean = grad.mean;
  if (grad_log_variance) *grad_log_variance = grad.log_variance;
  return obj;
}

PosteriorResult OptimizePosterior(const ModelSpec& spec, const Dataset& data,
                                  const BoundedLoss& loss,
                                  const StochasticModel& prior, double kappa,
                                  const ConfidenceSplit& split,
                                  const GridSizes& grid,
                                  const PosteriorBudget& budget,
                                  std::uint64_t seed) {
  prior.Validate();
  if (prior.dim() != spec.ParameterCount()) {
    throw std::invalid_argument("OptimizePosterior: prior dimension mismatch");
  }
  if (budget.steps < 0 || !(budget.learning_rate > 0.0) ||
      budget.draws_per_step < 1 || budget.max_halvings < 0) {
    throw std::invalid_argument("OptimizePosterior: invalid budget");
  }
  const double constant = kappa + UnionBoundLogTerm(data.size(), split, grid);
  PosteriorProblem problem(spec, data, loss, prior, constant,
                           budget.draws_per_step, seed);

  Point x{prior.mean, std::vector<double>(prior.dim())};
  for (std::size_t c = 0; c < prior.dim(); ++c) {
    x.log_variance[c] = std::log(prior.variance[c]);
  }
  PosteriorResult result;
  Point grad;
  result.final_objective = problem.Evaluate(x, &grad);
  if (!std::isfinite(result.final_objective.value)) {
    throw TrainingError("posterior objective is not finite at the prior");
  }
  result.objective_trace.push_back(result.final_objective.value);

  for (std::int64_t step = 0; step < budget.steps; ++step) {
    double lr = budget.learning_rate;
    bool accepted = false;
    for (int h = 0; h <= budget.max_halvings; ++h) {
      Point candidate = x;
      for (std::size_t c = 0; c < x.mean.size(); ++c) {
        candidate.mean[c] -= lr * grad.mean[c];
        candidate.log_variance[c] -= lr * grad.log_variance[c];
      }
      const PosteriorObjective obj = problem.Evaluate(candidate, nullptr);
      // A non-finite trial value counts as an increase.
      if (obj.value <= result.final_objective.value) {
        x = std::move(candidate);
        result.final_objective = problem.Evaluate(x, &grad);
        accepted = true;
        break;
      }
      lr *= 0.5;
      ++result.halvings;
    }
    if (!accepted) break;
    ++result.accepted_steps;
    result.objective_trace.push_back(result.final_objective.value);
  }

  result.posterior.mean = x.mean;
  result.posterior.variance.resize(x.log_variance.size());
  for (std::size_t c = 0; c < x.log_variance.size(); ++c) {
    result.posterior.variance[c] = std::exp(x.log_variance[c]);
  }
  return result;
}

namespace {

const BoundedLoss kZeroOne{LossKind::kZeroOne, 1.0};

void RunCell(const PipelineConfig& config, const Dataset& data,
             const StochasticModel& prior, const MaxInfoBound& kappa,
             const GridSizes& grid, Rng cell_rng, CellResult& cell) {
  const std::int64_t n = data.size();
  cell.prior_risk =
      McRiskOfStochasticModel(config.model, prior, data, kZeroOne,
                              config.final_draws,
                              cell_rng.Split("prior_risk").key());
  cell.prior_certificate = UnionBoundCertificate(cell.prior_risk, 0.0, kappa,
                                                 n, config.split, grid);
  cell.posterior = OptimizePosterior(
      config.model, data, config.train_loss, prior, kappa.value, config.split,
      grid, config.budget, cell_rng.Split("posterior").key());
  cell.posterior_risk = McRiskOfStochasticModel(
      config.model, cell.posterior.posterior, data, kZeroOne,
      config.final_draws, cell_rng.Split("posterior_risk").key());
  cell.certificate = UnionBoundCertificate(
      cell.posterior_risk, GaussianKl(cell.posterior.posterior, prior), kappa,
      n, config.split, grid);
  cell.ok = true;
}

void SelectBest(SweepResult& sweep) {
  for (std::size_t c = 0; c < sweep.cells.size(); ++c) {
    const CellResult& cell = sweep.cells[c];
    if (!cell.ok) continue;
    if (!sweep.best || cell.certificate.risk_upper_bound <
                           sweep.cells[*sweep.best].certificate.risk_upper_bound) {
      sweep.best = c;
    }
  }
}

}  // namespace

PipelineResult RunPipeline(const PipelineConfig& config, const Dataset& data) {
  config.Validate();
  data.Validate();
  if (data.num_features != config.model.input_dim ||
      data.num_classes > config.model.num_classes) {
    throw std::invalid_argument("RunPipeline: dataset does not match the model");
  }
  const std::int64_t n = data.size();
  const std::vector<double> theta0 = PipelineInit(config);
  const Rng root(config.seed);
  const std::int64_t k1 = static_cast<std::int64_t>(config.recipes.size());
  const std::int64_t k2 = static_cast<std::int64_t>(config.prior_variances.size());
  PipelineResult result;

  SweepResult dp;
  dp.prior_kind = PriorKind::kDpsgd;
  dp.grid = {k1, k2};
  const double beta_i = config.split.beta / static_cast<double>(k1);
  for (std::int64_t i = 0; i < k1; ++i) {
    TrainingRecipe recipe = config.recipes[i].recipe;
    recipe.dataset_size = n;
    std::string recipe_error;
    MaxInfoBound kappa;
    kappa.value = std::numeric_limits<double>::infinity();
    kappa.beta = beta_i;
    std::optional<std::vector<double>> mean;
    try {
      kappa = MaxInfoDpsgdOptimized(recipe, beta_i);
      RecipeSpec spec = config.recipes[i];
      spec.recipe = recipe;
      mean = BuildDpsgdPrior(config.model, data, config.train_loss, spec,
                             theta0, 1.0, root.Split("dpsgd").Split(i).key())
                 .mean;
    } catch (const std::exception& e) {
      recipe_error = e.what();
    }
    dp.kappas.push_back(kappa);
    for (std::int64_t j = 0; j < k2; ++j) {
      CellResult cell;
      cell.prior_kind = PriorKind::kDpsgd;
      cell.recipe_index = i;
      cell.variance_index = j;
      cell.tau = config.prior_variances[j];
      if (!mean) {
        cell.error = recipe_error;
      } else {
        try {
          RunCell(config, data, StochasticModel::Isotropic(*mean, cell.tau),
                  kappa, dp.grid, root.Split("dpsgd_cell").Split(i).Split(j),
                  cell);
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
        }
      }
      dp.cells.push_back(std::move(cell));
    }
  }
  SelectBest(dp);
  result.sweeps.push_back(std::move(dp));

  if (config.data_independent_baseline) {
    SweepResult base;
    base.prior_kind = PriorKind::kDataIndependent;
    base.grid = {1, k2};
    MaxInfoBound zero;
    zero.value = 0.0;
    zero.beta = config.split.beta;
    zero.method = BoundMethod::kDataIndependent;
    base.kappas.push_back(zero);
    for (std::int64_t j = 0; j < k2; ++j) {
      CellResult cell;
      cell.prior_kind = PriorKind::kDataIndependent;
      cell.recipe_index = -1;
      cell.variance_index = j;
      cell.tau = config.prior_variances[j];
      try {
        RunCell(config, data, BuildDataIndependentPrior(theta0, cell.tau), zero,
                base.grid, root.Split("data_independent_cell").Split(j), cell);
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      base.cells.push_back(std::move(cell));
    }
    SelectBest(base);
    result.sweeps.push_back(std::move(base));
  }
  return result;
}

std::vector<SummaryRow> Summarize(const PipelineResult& result) {
  std::vector<SummaryRow> rows;
  for (const SweepResult& sweep : result.sweeps) {
    if (!sweep.best) continue;
    const CellResult& cell = sweep.cells[*sweep.best];
    SummaryRow row;
    row.prior_kind = sweep.prior_kind;
    row.prior_risk = cell.prior_risk.value;
    row.prior_bound = cell.prior_certificate.risk_upper_bound;
    row.posterior_risk = cell.posterior_risk.value;
    row.kappa = cell.certificate.kappa.value;
    row.kl = cell.certificate.kl_divergence;
    row.posterior_bound = cell.certificate.risk_upper_bound;
    row.recipe_index = cell.recipe_index;
    row.tau = cell.tau;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dpcert
