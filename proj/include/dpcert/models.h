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

// Datasets, small classifiers with hand-written gradients and losses bounded
// in [0, 1].

#ifndef DPCERT_MODELS_H_
#define DPCERT_MODELS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpcert/dpsgd.h"
#include "dpcert/pac_bayes.h"
#include "dpcert/rng.h"

namespace dpcert {

enum class Provenance { kSynthetic, kCsv };

// n rows of p features (row-major) with integer labels in [0, C).
struct Dataset {
  std::int64_t num_features = 0;
  int num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;
  Provenance provenance = Provenance::kSynthetic;

  std::size_t size() const { return labels.size(); }
  std::span<const double> Row(std::size_t i) const {
    return {features.data() + i * num_features,
            static_cast<std::size_t>(num_features)};
  }
  // Throws std::invalid_argument on empty data, shape mismatch, non-finite
  // features or labels outside [0, C).
  void Validate() const;

  bool operator==(const Dataset&) const = default;
};

enum class Architecture { kLinearSoftmax, kMlp };
std::string_view ArchitectureName(Architecture arch);
Architecture ParseArchitecture(std::string_view name);

// Dense layers input -> hidden... -> classes, ReLU between layers, softmax
// on top. Parameters are stored layer by layer, each as a row-major
// (out x in) weight matrix followed by the out biases.
struct ModelSpec {
  Architecture architecture = Architecture::kLinearSoftmax;
  std::int64_t input_dim = 1;
  int num_classes = 2;
  std::vector<std::int64_t> hidden;  // empty for kLinearSoftmax

  static ModelSpec LinearSoftmax(std::int64_t input_dim, int num_classes);
  static ModelSpec Mlp(std::int64_t input_dim, std::vector<std::int64_t> hidden,
                       int num_classes);

  // Widths including input and output.
  std::vector<std::int64_t> LayerWidths() const;
  std::size_t ParameterCount() const;
  void Validate() const;
};

enum class LossKind { kZeroOne, kClampedCrossEntropy };
std::string_view LossKindName(LossKind kind);
LossKind ParseLossKind(std::string_view name);

// zero_one: 1 iff the first arg-max logit is not the label.
// clamped_cross_entropy: min(CE, c_max) / c_max.
struct BoundedLoss {
  LossKind kind = LossKind::kClampedCrossEntropy;
  double clamp = 4.0;  // c_max
};

// Loss of one sample, in [0, 1]. When `gradient` is non-empty it receives
// the exact gradient with respect to `params` (zero beyond the clamp).
// Requesting a gradient of the zero-one loss throws std::invalid_argument.
double LossAndGradient(const ModelSpec& spec, std::span<const double> params,
                       std::span<const double> x, int label,
                       const BoundedLoss& loss, std::span<double> gradient = {});

// Per-sample gradient callback for DP-SGD over `data`, which must outlive
// the returned function.
PerSampleGradient LossGradient(const ModelSpec& spec, const Dataset& data,
                               const BoundedLoss& loss);

// Mean loss over the dataset.
double Risk(const ModelSpec& spec, std::span<const double> params,
            const Dataset& data, const BoundedLoss& loss);

// Average of Risk over N parameter draws from the diagonal Gaussian. Draw k
// uses the substream Rng(seed).Split(k), so the result does not depend on
// the number of worker threads.
RiskEstimate McRiskOfStochasticModel(const ModelSpec& spec,
                                     const StochasticModel& model,
                                     const Dataset& data,
                                     const BoundedLoss& loss,
                                     std::int64_t num_draws,
                                     std::uint64_t seed);

// theta_0: uniform(-a, a) per weight with a = scale / sqrt(fan_in) of the
// layer; biases start at zero.
std::vector<double> InitialParameters(const ModelSpec& spec, Rng& rng,
                                      double scale = 1.0);

enum class SynthKind { kTwoGaussians, kXor };
std::string_view SynthKindName(SynthKind kind);
SynthKind ParseSynthKind(std::string_view name);

// two_gaussians: label i % 2, features N(+-(separation / 2) u, I) with u the
// unit diagonal direction. xor: features uniform on [-1, 1]^p (p >= 2),
// label (x0 > 0) xor (x1 > 0); `separation` is unused.
Dataset SynthDataset(SynthKind kind, std::int64_t n, std::int64_t p,
                     std::uint64_t seed, double separation = 4.0);

// UTF-8, comma separated, optional single header line, p feature columns
// then one integer label column. Throws ParseError with a 1-based line
// number on malformed rows and std::invalid_argument on an empty file.
Dataset LoadCsv(const std::string& path);
void WriteCsv(const Dataset& data, const std::string& path);

}  // namespace dpcert

#endif  // DPCERT_MODELS_H_
