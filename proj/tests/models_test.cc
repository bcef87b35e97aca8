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

#include "dpcert/models.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "dpcert/errors.h"
#include "gtest/gtest.h"

namespace dpcert {
namespace {

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("dpcert_models_test_" + std::to_string(::getpid()) + "_" + name))
      .string();
}

double Norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

TEST(ModelSpecTest, ParameterCounts) {
  EXPECT_EQ(ModelSpec::LinearSoftmax(5, 3).ParameterCount(), 18u);
  EXPECT_EQ(ModelSpec::Mlp(2, {32, 32}, 2).ParameterCount(),
            3u * 32 + 33u * 32 + 33u * 2);
  EXPECT_THROW(ModelSpec::Mlp(2, {}, 2), std::invalid_argument);
  EXPECT_THROW(ModelSpec::LinearSoftmax(2, 1), std::invalid_argument);
  EXPECT_EQ(ParseArchitecture(ArchitectureName(Architecture::kMlp)),
            Architecture::kMlp);
}

TEST(LossTest, UniformOutputGivesLogClasses) {
  for (int classes : {2, 3, 10, 100}) {
    const ModelSpec spec = ModelSpec::LinearSoftmax(4, classes);
    const std::vector<double> zeros(spec.ParameterCount(), 0.0);
    const std::vector<double> x{1.0, -2.0, 0.5, 3.0};
    const double v = LossAndGradient(spec, zeros, x, 1, {LossKind::kClampedCrossEntropy, 4.0});
    EXPECT_NEAR(v, std::min(std::log(classes), 4.0) / 4.0, 1e-14);
  }
}

TEST(LossTest, ZeroOneCorrectPrediction) {
  const ModelSpec spec = ModelSpec::LinearSoftmax(1, 2);
  // logits: (-x, x).
  const std::vector<double> params{-1.0, 1.0, 0.0, 0.0};
  const std::vector<double> x{2.0};
  EXPECT_EQ(LossAndGradient(spec, params, x, 1, {LossKind::kZeroOne}), 0.0);
  EXPECT_EQ(LossAndGradient(spec, params, x, 0, {LossKind::kZeroOne}), 1.0);
  std::vector<double> grad(4);
  EXPECT_THROW(LossAndGradient(spec, params, x, 1, {LossKind::kZeroOne}, grad),
               std::invalid_argument);
  EXPECT_THROW(LossAndGradient(spec, {params.data(), 3}, x, 1, {}),
               std::invalid_argument);
}

TEST(LossTest, ClampZeroesGradient) {
  const ModelSpec spec = ModelSpec::LinearSoftmax(1, 2);
  const std::vector<double> params{10.0, -10.0, 0.0, 0.0};
  const std::vector<double> x{1.0};
  std::vector<double> grad(4, 7.0);
  EXPECT_EQ(LossAndGradient(spec, params, x, 1, {LossKind::kClampedCrossEntropy, 4.0}, grad), 1.0);
  for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(LossTest, EveryEvaluationInUnitInterval) {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> normal(0.0, 5.0);
  const ModelSpec specs[] = {ModelSpec::LinearSoftmax(3, 4),
                             ModelSpec::Mlp(3, {8, 5}, 4)};
  for (const ModelSpec& spec : specs) {
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> params(spec.ParameterCount());
      for (double& p : params) p = normal(gen);
      const std::vector<double> x{normal(gen), normal(gen), normal(gen)};
      const int y = i % 4;
      for (LossKind kind : {LossKind::kZeroOne, LossKind::kClampedCrossEntropy}) {
        const double v = LossAndGradient(spec, params, x, y, {kind, 0.5 + (i % 7)});
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

// Checks analytic gradients against central differences at points that stay
// clear of the clamp and of ReLU kinks.
void GradientCheck(const ModelSpec& spec, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const BoundedLoss loss{LossKind::kClampedCrossEntropy, 50.0};
  const double h = 1e-5;
  int checked = 0;
  while (checked < 100) {
    std::vector<double> params(spec.ParameterCount());
    for (double& p : params) p = 0.7 * normal(gen);
    std::vector<double> x(spec.input_dim);
    for (double& v : x) v = normal(gen);
    const int y = static_cast<int>(gen() % spec.num_classes);

    // Reject points whose hidden pre-activations come within 1e-3 of a kink.
    bool near_kink = false;
    {
      std::vector<double> act = x;
      const std::vector<std::int64_t> widths = spec.LayerWidths();
      std::size_t offset = 0;
      for (std::size_t l = 1; l + 1 < widths.size(); ++l) {
        std::vector<double> next(widths[l]);
        for (std::int64_t o = 0; o < widths[l]; ++o) {
          double z = params[offset + widths[l - 1] * widths[l] + o];
          for (std::int64_t i = 0; i < widths[l - 1]; ++i) {
            z += params[offset + o * widths[l - 1] + i] * act[i];
          }
          near_kink |= std::abs(z) < 1e-3;
          next[o] = std::max(0.0, z);
        }
        offset += (widths[l - 1] + 1) * widths[l];
        act = next;
      }
    }
    if (near_kink) continue;

    std::vector<double> analytic(params.size());
    const double v = LossAndGradient(spec, params, x, y, loss, analytic);
    ASSERT_LT(v, 0.99);
    std::vector<double> numeric(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      std::vector<double> plus = params, minus = params;
      plus[k] += h;
      minus[k] -= h;
      numeric[k] = (LossAndGradient(spec, plus, x, y, loss) -
                    LossAndGradient(spec, minus, x, y, loss)) / (2 * h);
    }
    std::vector<double> diff(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) diff[k] = analytic[k] - numeric[k];
    const double scale = std::max(Norm(analytic), Norm(numeric));
    ASSERT_GT(scale, 0.0);
    EXPECT_LT(Norm(diff) / scale, 1e-5) << "point " << checked;
    ++checked;
  }
}

TEST(GradientTest, LinearSoftmaxMatchesFiniteDifferences) {
  GradientCheck(ModelSpec::LinearSoftmax(4, 3), 1);
}

TEST(GradientTest, MlpMatchesFiniteDifferences) {
  GradientCheck(ModelSpec::Mlp(3, {6, 5}, 3), 2);
}

TEST(RiskTest, Properties) {
  const ModelSpec spec = ModelSpec::LinearSoftmax(1, 2);
  const std::vector<double> params{-1.0, 1.0, 0.0, 0.0};
  Dataset data{1, 2, {-2.0, -1.0, 0.5, 3.0}, {0, 0, 1, 1}, Provenance::kSynthetic};
  EXPECT_EQ(Risk(spec, params, data, {LossKind::kZeroOne}), 0.0);
  Dataset single{1, 2, {0.3}, {0}, Provenance::kSynthetic};
  const BoundedLoss ce{LossKind::kClampedCrossEntropy, 4.0};
  EXPECT_EQ(Risk(spec, params, single, ce),
            LossAndGradient(spec, params, single.Row(0), 0, ce));
  Dataset permuted{1, 2, {3.0, -1.0, -2.0, 0.5}, {1, 0, 0, 1}, Provenance::kSynthetic};
  EXPECT_DOUBLE_EQ(Risk(spec, params, data, ce), Risk(spec, params, permuted, ce));
  Dataset empty{1, 2, {}, {}, Provenance::kSynthetic};
  EXPECT_THROW(Risk(spec, params, empty, ce), std::invalid_argument);
}

TEST(McRiskTest, DegenerateVarianceAndDeterminism) {
  const Dataset data = SynthDataset(SynthKind::kTwoGaussians, 60, 3, 4);
  const ModelSpec spec = ModelSpec::LinearSoftmax(3, 2);
  Rng rng(8);
  const std::vector<double> mean = InitialParameters(spec, rng);
  const BoundedLoss ce{LossKind::kClampedCrossEntropy, 4.0};
  const RiskEstimate r = McRiskOfStochasticModel(
      spec, StochasticModel::Isotropic(mean, 1e-12), data, ce, 50, 1);
  EXPECT_LT(std::abs(r.value - Risk(spec, mean, data, ce)), 1e-6);
  EXPECT_EQ(r.num_samples, 50);
  EXPECT_EQ(r.kind, RiskKind::kMonteCarlo);

  const StochasticModel wide = StochasticModel::Isotropic(mean, 0.5);
  const double a = McRiskOfStochasticModel(spec, wide, data, ce, 300, 12).value;
  const double b = McRiskOfStochasticModel(spec, wide, data, ce, 300, 12).value;
  EXPECT_EQ(a, b);
  ::setenv("DPCERT_THREADS", "1", 1);
  const double c = McRiskOfStochasticModel(spec, wide, data, ce, 300, 12).value;
  ::unsetenv("DPCERT_THREADS");
  EXPECT_EQ(a, c);
  EXPECT_NE(a, McRiskOfStochasticModel(spec, wide, data, ce, 300, 13).value);
}

TEST(McRiskTest, MatchesGaussianCdfOnThresholdTask) {
  // p = 1, C = 2: class 1 wins iff D = (w1 - w0) x + (b1 - b0) > 0, and D is
  // Gaussian under a diagonal Gaussian over (w0, w1, b0, b1).
  const ModelSpec spec = ModelSpec::LinearSoftmax(1, 2);
  Dataset data{1, 2, {}, {}, Provenance::kSynthetic};
  for (int i = 0; i < 40; ++i) {
    const double x = -2.0 + 4.0 * i / 39.0;
    data.features.push_back(x);
    data.labels.push_back(x > 0.3 ? 1 : 0);
  }
  const StochasticModel model{{-0.4, 0.6, 0.1, -0.2}, {0.3, 0.2, 0.25, 0.15}};
  double closed_form = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data.features[i];
    const double mu = (model.mean[1] - model.mean[0]) * x + model.mean[3] - model.mean[2];
    const double sd = std::sqrt((model.variance[0] + model.variance[1]) * x * x +
                                model.variance[2] + model.variance[3]);
    const double p_class1 = 0.5 * std::erfc(-mu / (sd * std::sqrt(2.0)));
    closed_form += data.labels[i] == 1 ? 1 - p_class1 : p_class1;
  }
  closed_form /= static_cast<double>(data.size());
  const std::int64_t n_draws = 10000;
  const RiskEstimate r = McRiskOfStochasticModel(spec, model, data,
                                                 {LossKind::kZeroOne}, n_draws, 77);
  // Per-draw risks lie in [0, 1], so their variance is at most mu (1 - mu).
  const double se = std::sqrt(closed_form * (1 - closed_form) / n_draws);
  EXPECT_NEAR(r.value, closed_form, 3 * se);
}

TEST(McRiskTest, StandardErrorShrinksAsInverseSqrtN) {
  const Dataset data = SynthDataset(SynthKind::kTwoGaussians, 40, 2, 21, 1.0);
  const ModelSpec spec = ModelSpec::LinearSoftmax(2, 2);
  const StochasticModel model = StochasticModel::Isotropic(std::vector<double>(6, 0.1), 1.0);
  std::vector<double> log_n, log_sd;
  for (std::int64_t n : {16, 64, 256, 1024, 4096}) {
    std::vector<double> est;
    for (std::uint64_t s = 0; s < 60; ++s) {
      est.push_back(McRiskOfStochasticModel(spec, model, data, {LossKind::kZeroOne},
                                            n, 1000 + s).value);
    }
    const double mean = std::accumulate(est.begin(), est.end(), 0.0) / est.size();
    double var = 0;
    for (double e : est) var += (e - mean) * (e - mean);
    var /= est.size() - 1;
    log_n.push_back(std::log(static_cast<double>(n)));
    log_sd.push_back(0.5 * std::log(var));
  }
  const double mx = std::accumulate(log_n.begin(), log_n.end(), 0.0) / log_n.size();
  const double my = std::accumulate(log_sd.begin(), log_sd.end(), 0.0) / log_sd.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sxy += (log_n[i] - mx) * (log_sd[i] - my);
    sxx += (log_n[i] - mx) * (log_n[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -0.5, 0.1);
}

TEST(InitialParametersTest, RangeAndDeterminism) {
  const ModelSpec spec = ModelSpec::Mlp(16, {4}, 3);
  Rng a(5), b(5);
  const std::vector<double> pa = InitialParameters(spec, a);
  EXPECT_EQ(pa, InitialParameters(spec, b));
  ASSERT_EQ(pa.size(), spec.ParameterCount());
  for (std::size_t k = 0; k < 64; ++k) EXPECT_LE(std::abs(pa[k]), 0.25);
  for (std::size_t k = 64; k < 68; ++k) EXPECT_EQ(pa[k], 0.0);
  for (std::size_t k = 68; k < 80; ++k) EXPECT_LE(std::abs(pa[k]), 0.5);
}

TEST(SynthDatasetTest, ReproducibleAndBalanced) {
  for (SynthKind kind : {SynthKind::kTwoGaussians, SynthKind::kXor}) {
    for (std::int64_t n : {2, 7, 100, 1001}) {
      const Dataset a = SynthDataset(kind, n, 3, 42);
      EXPECT_EQ(a, SynthDataset(kind, n, 3, 42));
      EXPECT_NO_THROW(a.Validate());
      EXPECT_EQ(a.size(), static_cast<std::size_t>(n));
      if (kind == SynthKind::kTwoGaussians) {
        const auto ones = std::count(a.labels.begin(), a.labels.end(), 1);
        EXPECT_LE(std::abs(static_cast<long>(n - 2 * ones)), 1);
      }
    }
  }
  EXPECT_NE(SynthDataset(SynthKind::kXor, 10, 2, 1), SynthDataset(SynthKind::kXor, 10, 2, 2));
  EXPECT_THROW(SynthDataset(SynthKind::kTwoGaussians, 1, 2, 0), std::invalid_argument);
  EXPECT_THROW(SynthDataset(SynthKind::kXor, 10, 1, 0), std::invalid_argument);
}

TEST(CsvTest, RoundTrip) {
  const Dataset a = SynthDataset(SynthKind::kTwoGaussians, 25, 4, 3);
  const std::string path = TempPath("roundtrip.csv");
  WriteCsv(a, path);
  Dataset b = LoadCsv(path);
  EXPECT_EQ(b.provenance, Provenance::kCsv);
  b.provenance = Provenance::kSynthetic;
  EXPECT_EQ(a, b);
  std::remove(path.c_str());
}

TEST(CsvTest, HeaderOptionalAndErrorsNameTheLine) {
  const std::string path = TempPath("format.csv");
  {
    std::ofstream(path) << "1.5, 2,0\n-3e-1,4,2\n";
  }
  Dataset d = LoadCsv(path);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.num_features, 2);
  EXPECT_EQ(d.num_classes, 3);
  EXPECT_DOUBLE_EQ(d.features[2], -0.3);
  {
    std::ofstream(path) << "a,b,label\n1,2,0\n";
  }
  EXPECT_EQ(LoadCsv(path).size(), 1u);
  {
    std::ofstream(path) << "a,b,label\n1,2,0\n3,oops,1\n";
  }
  try {
    LoadCsv(path);
    ADD_FAILURE() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
  {
    std::ofstream(path) << "1,2,0\n1,2,3,1\n";
  }
  EXPECT_THROW(LoadCsv(path), ParseError);
  {
    std::ofstream(path) << "1,2,0\n1,2,0.5\n";
  }
  EXPECT_THROW(LoadCsv(path), ParseError);
  {
    std::ofstream(path) << "";
  }
  EXPECT_THROW(LoadCsv(path), std::invalid_argument);
  std::remove(path.c_str());
  EXPECT_THROW(LoadCsv(TempPath("missing.csv")), std::invalid_argument);
}

}  // namespace
}  // namespace dpcert
