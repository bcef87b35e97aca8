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

// Cross-module scenarios: data in, DP-SGD training, certificates out.

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "dpcert/bounds.h"
#include "dpcert/certify.h"
#include "dpcert/config.h"
#include "dpcert/dpsgd.h"
#include "dpcert/models.h"
#include "dpcert/report.h"
#include "dpcert/rng.h"
#include "gtest/gtest.h"

namespace dpcert {
namespace {

TEST(IntegrationTest, SeparableTaskReachesZeroTrainingRisk) {
  const Dataset data = SynthDataset(SynthKind::kTwoGaussians, 400, 3, 2, 14.0);
  const ModelSpec spec = ModelSpec::LinearSoftmax(3, 2);
  const BoundedLoss zero_one{LossKind::kZeroOne, 1.0};
  Rng init(1);
  const std::vector<double> theta0 = InitialParameters(spec, init);
  TrainingRecipe recipe;
  recipe.epochs = 5;
  recipe.steps_per_epoch = 8;
  recipe.batch_size = 50;
  recipe.clip_threshold = std::numeric_limits<double>::infinity();
  recipe.noise_scale = 0.0;
  recipe.dataset_size = data.size();
  UpdateRule rule;
  rule.learning_rates = {0.01};
  const std::vector<double> theta =
      DpsgdBatch(data.size(), recipe, rule, LossGradient(spec, data, {}), theta0, 3);
  EXPECT_EQ(Risk(spec, theta, data, zero_one), 0.0);
  EXPECT_GT(Risk(spec, theta0, data, zero_one) + 1e-12, 0.0);

  // Same task with clipping and noise still learns.
  recipe.clip_threshold = 0.5;
  recipe.noise_scale = 2.0;
  const std::vector<double> private_theta =
      DpsgdBatch(data.size(), recipe, rule, LossGradient(spec, data, {}), theta0, 3);
  EXPECT_LT(Risk(spec, private_theta, data, zero_one), 0.05);
}

TEST(IntegrationTest, AllUpdateRulesTrainAnMlpOnXor) {
  const Dataset data = SynthDataset(SynthKind::kXor, 400, 2, 5);
  const ModelSpec spec = ModelSpec::Mlp(2, {16}, 2);
  const BoundedLoss zero_one{LossKind::kZeroOne, 1.0};
  Rng init(2);
  const std::vector<double> theta0 = InitialParameters(spec, init);
  TrainingRecipe recipe;
  recipe.epochs = 60;
  recipe.steps_per_epoch = 8;
  recipe.batch_size = 50;
  recipe.clip_threshold = 1.0;
  recipe.noise_scale = 0.5;
  recipe.dataset_size = data.size();
  for (UpdateKind kind : {UpdateKind::kPlain, UpdateKind::kMomentumWd,
                          UpdateKind::kAdamLike}) {
    UpdateRule rule;
    rule.kind = kind;
    rule.learning_rates = {kind == UpdateKind::kAdamLike ? 0.02 : 0.01};
    const std::vector<double> theta = DpsgdBatch(
        data.size(), recipe, rule, LossGradient(spec, data, {}), theta0, 4);
    EXPECT_LT(Risk(spec, theta, data, zero_one), 0.25) << UpdateKindName(kind);
  }
}

CertifyConfig SmallCertify() {
  CertifyConfig c;
  c.dataset.n = 600;
  c.pipeline.model = ModelSpec::LinearSoftmax(2, 2);
  c.pipeline.init_scale = 0.1;
  RecipeSpec r;
  r.recipe.steps_per_epoch = 1;
  r.recipe.batch_size = 600;
  r.recipe.clip_threshold = 0.2;
  r.recipe.noise_scale = 0.2 * std::sqrt(600 / 0.01);
  r.rule.learning_rates = {0.01};
  c.pipeline.recipes = {r};
  c.pipeline.prior_variances = {0.01, 0.1};
  c.pipeline.budget.steps = 30;
  c.pipeline.budget.learning_rate = 0.2;
  c.pipeline.final_draws = 300;
  c.pipeline.seed = 9;
  return c;
}

TEST(IntegrationTest, CsvAndSyntheticSourcesGiveIdenticalReports) {
  const CertifyConfig synthetic = SmallCertify();
  const Dataset data = LoadDataset(synthetic.dataset, synthetic.pipeline.seed);
  const auto path = std::filesystem::temp_directory_path() / "dpcert_integration.csv";
  WriteCsv(data, path.string());
  CertifyConfig from_csv = synthetic;
  from_csv.dataset.source = DatasetConfig::Source::kCsv;
  from_csv.dataset.path = path.string();
  const CertifyOutcome a = RunCertify(synthetic);
  const CertifyOutcome b = RunCertify(from_csv);
  std::filesystem::remove(path);
  EXPECT_EQ(a.outputs.dump(), b.outputs.dump());
}

TEST(IntegrationTest, MlpPipelineProducesValidCertificates) {
  CertifyConfig c = SmallCertify();
  c.pipeline.model = ModelSpec::Mlp(2, {4}, 2);
  c.pipeline.prior_variances = {0.01};
  c.pipeline.final_draws = 100;
  const Dataset data = LoadDataset(c.dataset, c.pipeline.seed);
  const PipelineResult result = RunPipeline(c.pipeline, data);
  for (const SweepResult& sweep : result.sweeps) {
    for (const CellResult& cell : sweep.cells) {
      ASSERT_TRUE(cell.ok) << cell.error;
      EXPECT_GE(cell.certificate.risk_upper_bound, cell.posterior_risk.value);
      EXPECT_LE(cell.certificate.risk_upper_bound, 1.0);
    }
  }
}

TEST(IntegrationTest, ReportKappaMatchesKappaCommand) {
  CertifyConfig c = SmallCertify();
  RecipeSpec second = c.pipeline.recipes[0];
  second.recipe.noise_scale *= 2;
  c.pipeline.recipes.push_back(second);
  c.pipeline.data_independent_baseline = false;
  c.pipeline.budget.steps = 0;
  const CertifyOutcome out = RunCertify(c);
  for (std::size_t i = 0; i < 2; ++i) {
    KappaConfig k;
    k.recipe = c.pipeline.recipes[i].recipe;
    k.recipe.dataset_size = c.dataset.n;
    k.beta = c.pipeline.split.beta / 2;
    EXPECT_EQ(out.outputs["sweeps"][0]["kappas"][i]["value"],
              KappaOutputs(k)["optimized"]["value"]);
  }
}

TEST(IntegrationTest, DpsgdPriorBeatsDataIndependentPrior) {
  const std::string configs = std::string(DPCERT_SOURCE_DIR) + "/configs/";
  CertifyConfig c = ParseCertifyConfig(
      ReadJsonFile(configs + "certify_two_gaussians.json"), configs);
  c.pipeline.seed = 8;  // the bundled seed is exercised by the acceptance run
  const Dataset data = LoadDataset(c.dataset, c.pipeline.seed);
  const std::vector<SummaryRow> rows = Summarize(RunPipeline(c.pipeline, data));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].prior_kind, PriorKind::kDpsgd);
  EXPECT_LT(rows[0].posterior_bound, 1.0);
  EXPECT_LE(rows[0].posterior_bound, rows[1].posterior_bound);
  EXPECT_LT(rows[0].prior_risk, rows[1].prior_risk);
}

}  // namespace
}  // namespace dpcert
