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

// JSON configuration files. Every file carries "version": 1; unknown fields
// and schema violations throw ConfigError with a JSON pointer to the field.
// The schema is documented in docs/config.md.

#ifndef DPCERT_CONFIG_H_
#define DPCERT_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dpcert/bounds.h"
#include "dpcert/certify.h"
#include "dpcert/models.h"
#include "dpcert/oracle.h"
#include "json.hpp"

namespace dpcert {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;

// Reads and parses a JSON file; ConfigError with pointer "" when the file
// is missing or is not valid JSON.
Json ReadJsonFile(const std::string& path);

// Non-finite numbers are written as the strings "inf", "-inf" and "nan",
// and read back from them.
Json NumberToJson(double x);

struct DatasetConfig {
  enum class Source { kSynthetic, kCsv };
  Source source = Source::kSynthetic;
  SynthKind kind = SynthKind::kTwoGaussians;
  std::int64_t n = 2000;
  std::int64_t features = 2;
  double separation = 4.0;
  std::string path;  // kCsv; relative paths resolve against base_dir
};

// Synthetic data uses the seed Rng(seed).Split("data").key().
Dataset LoadDataset(const DatasetConfig& config, std::uint64_t seed);

struct CertifyConfig {
  DatasetConfig dataset;
  PipelineConfig pipeline;
};

// `base_dir` resolves relative dataset paths.
CertifyConfig ParseCertifyConfig(const Json& json,
                                 const std::string& base_dir = "");
Json ToJson(const CertifyConfig& config);

struct OracleCase {
  std::string name;
  TinyInstance instance;
  BoundMethod method = BoundMethod::kOptimized;
  double beta = 0.1;
  std::int64_t trials = 100000;
  double threshold_scale = 1.0;
  std::int64_t repeats = 1;  // independent seeds, all must pass
};

struct OracleSuiteConfig {
  std::uint64_t seed = 0;
  std::vector<OracleCase> cases;
};

OracleSuiteConfig ParseOracleSuiteConfig(const Json& json);
Json ToJson(const OracleSuiteConfig& config);

struct KappaConfig {
  TrainingRecipe recipe;
  double beta = 0.025;
  double epsilon = 0.0;  // pure-DP comparator, skipped when 0
};

KappaConfig ParseKappaConfig(const Json& json);
Json ToJson(const KappaConfig& config);

struct FigureConfig {
  std::int64_t epochs = 1;
  std::int64_t steps_per_epoch = 12;
  std::int64_t batch_size = 5000;
  double beta = 0.025;
  std::vector<std::int64_t> n_grid{60000, 120000, 240000, 480000, 960000};
  std::vector<double> ratio_grid{0.005, 0.01, 0.02, 0.05};  // zeta / sigma
  std::vector<double> delta_grid{0.05};
};

FigureConfig ParseFigureConfig(const Json& json);
Json ToJson(const FigureConfig& config);

Json ToJson(const TrainingRecipe& recipe);
Json ToJson(const UpdateRule& rule);
Json ToJson(const TinyInstance& instance);

}  // namespace dpcert

#endif  // DPCERT_CONFIG_H_
