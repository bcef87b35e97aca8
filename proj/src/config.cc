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

#include "dpcert/config.h"

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpcert/errors.h"
#include "dpcert/rng.h"

namespace dpcert {
namespace {

std::string EscapePointerToken(const std::string& token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// Reads the fields of one JSON object, remembering which ones were used so
// that Finish() can reject the rest.
class Fields {
 public:
  Fields(const Json& json, std::string pointer)
      : json_(json), pointer_(std::move(pointer)) {
    if (!json_.is_object()) throw ConfigError(pointer_, "expected an object");
  }

  std::string At(const std::string& key) const {
    return pointer_ + "/" + EscapePointerToken(key);
  }

  bool Has(const std::string& key) const { return json_.contains(key); }

  const Json* Find(const std::string& key) {
    used_.insert(key);
    auto it = json_.find(key);
    return it == json_.end() ? nullptr : &*it;
  }

  const Json& Need(const std::string& key) {
    const Json* v = Find(key);
    if (!v) throw ConfigError(At(key), "required field is missing");
    return *v;
  }

  double Number(const std::string& key, double fallback) {
    const Json* v = Find(key);
    return v ? ReadNumber(*v, At(key)) : fallback;
  }

  std::int64_t Integer(const std::string& key, std::int64_t fallback) {
    const Json* v = Find(key);
    return v ? ReadInteger(*v, At(key)) : fallback;
  }

  std::uint64_t Unsigned(const std::string& key, std::uint64_t fallback) {
    const Json* v = Find(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned()) {
      throw ConfigError(At(key), "expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  bool Boolean(const std::string& key, bool fallback) {
    const Json* v = Find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(At(key), "expected a boolean");
    return v->get<bool>();
  }

  std::string String(const std::string& key, const std::string& fallback) {
    const Json* v = Find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(At(key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> Numbers(const std::string& key,
                              std::vector<double> fallback) {
    const Json* v = Find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(At(key), "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(ReadNumber((*v)[i], At(key) + "/" + std::to_string(i)));
    }
    return out;
  }

  std::vector<std::int64_t> Integers(const std::string& key,
                                     std::vector<std::int64_t> fallback) {
    const Json* v = Find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(At(key), "expected an array");
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(ReadInteger((*v)[i], At(key) + "/" + std::to_string(i)));
    }
    return out;
  }

  void Finish() const {
    for (auto it = json_.begin(); it != json_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError(At(it.key()), "unknown field");
      }
    }
  }

  static double ReadNumber(const Json& v, const std::string& pointer) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError(pointer, "expected a number");
  }

  static std::int64_t ReadInteger(const Json& v, const std::string& pointer) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9.0e15) {
        return static_cast<std::int64_t>(d);
      }
    }
    throw ConfigError(pointer, "expected an integer");
  }

 private:
  const Json& json_;
  std::string pointer_;
  std::set<std::string> used_;
};

void CheckVersion(Fields& f) {
  const Json& v = f.Need("version");
  if (!v.is_number_integer() || v.get<std::int64_t>() != kConfigVersion) {
    throw ConfigError(f.At("version"),
                      "unsupported version, expected " +
                          std::to_string(kConfigVersion));
  }
}

// Runs `check`, turning std::invalid_argument into ConfigError at `pointer`.
template <typename Check>
void Checked(const std::string& pointer, Check&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(pointer, e.what());
  }
}

template <typename Enum, typename Parse>
Enum ParseEnum(Fields& f, const std::string& key, Enum fallback, Parse parse) {
  const Json* v = f.Find(key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(f.At(key), "expected a string");
  Enum out = fallback;
  Checked(f.At(key), [&] { out = parse(v->get<std::string>()); });
  return out;
}

TrainingRecipe ParseRecipe(const Json& json, const std::string& pointer,
                           bool with_dataset_size) {
  Fields f(json, pointer);
  TrainingRecipe r;
  r.epochs = f.Integer("epochs", r.epochs);
  r.steps_per_epoch = f.Integer("steps_per_epoch", r.steps_per_epoch);
  r.batch_size = f.Integer("batch_size", r.batch_size);
  r.clip_threshold = f.Number("clip_threshold", r.clip_threshold);
  r.noise_scale = f.Number("noise_scale", r.noise_scale);
  if (with_dataset_size) {
    r.dataset_size =
        f.Integer("dataset_size", r.steps_per_epoch * r.batch_size);
  }
  f.Finish();
  return r;
}

UpdateRule ParseUpdateRule(const Json& json, const std::string& pointer) {
  Fields f(json, pointer);
  UpdateRule rule;
  rule.kind = ParseEnum(f, "kind", rule.kind, ParseUpdateKind);
  rule.learning_rates = f.Numbers("learning_rates", rule.learning_rates);
  rule.momentum = f.Number("momentum", rule.momentum);
  rule.weight_decay = f.Number("weight_decay", rule.weight_decay);
  rule.second_moment = f.Number("second_moment", rule.second_moment);
  rule.epsilon = f.Number("epsilon", rule.epsilon);
  f.Finish();
  return rule;
}

DatasetConfig ParseDataset(const Json& json, const std::string& pointer,
                           const std::string& base_dir) {
  Fields f(json, pointer);
  DatasetConfig d;
  const std::string source = f.String("source", "synthetic");
  if (source == "synthetic") {
    d.source = DatasetConfig::Source::kSynthetic;
    d.kind = ParseEnum(f, "kind", d.kind, ParseSynthKind);
    d.n = f.Integer("n", d.n);
    d.features = f.Integer("features", d.features);
    d.separation = f.Number("separation", d.separation);
    if (d.n < 2) throw ConfigError(f.At("n"), "must be at least 2");
    if (d.features < 1) throw ConfigError(f.At("features"), "must be positive");
    if (d.kind == SynthKind::kXor && d.features < 2) {
      throw ConfigError(f.At("features"), "xor needs at least 2 features");
    }
  } else if (source == "csv") {
    d.source = DatasetConfig::Source::kCsv;
    d.path = f.String("path", "");
    if (d.path.empty()) throw ConfigError(f.At("path"), "required for csv");
    std::filesystem::path p(d.path);
    if (p.is_relative() && !base_dir.empty()) {
      d.path = (std::filesystem::path(base_dir) / p).lexically_normal().string();
    }
    if (!std::filesystem::is_regular_file(d.path)) {
      throw ConfigError(f.At("path"), "no such file: " + d.path);
    }
  } else {
    throw ConfigError(f.At("source"), "expected \"synthetic\" or \"csv\"");
  }
  f.Finish();
  return d;
}

ModelSpec ParseModel(const Json& json, const std::string& pointer,
                     const DatasetConfig& data) {
  Fields f(json, pointer);
  const Architecture arch =
      ParseEnum(f, "architecture", Architecture::kLinearSoftmax, ParseArchitecture);
  const std::vector<std::int64_t> hidden = f.Integers("hidden", {});
  const std::int64_t input_dim =
      f.Integer("input_dim", data.source == DatasetConfig::Source::kSynthetic
                                 ? data.features
                                 : 0);
  const std::int64_t classes = f.Integer("num_classes", 2);
  f.Finish();
  if (input_dim < 1) {
    throw ConfigError(pointer + "/input_dim", "required for csv datasets");
  }
  ModelSpec spec;
  spec.architecture = arch;
  spec.input_dim = input_dim;
  spec.num_classes = static_cast<int>(classes);
  spec.hidden = hidden;
  if (arch == Architecture::kLinearSoftmax && !hidden.empty()) {
    throw ConfigError(pointer + "/hidden", "linear_softmax has no hidden layers");
  }
  Checked(pointer, [&] { spec.Validate(); });
  return spec;
}

TinyInstance ParseInstance(const Json& json, const std::string& pointer) {
  Fields f(json, pointer);
  TinyInstance inst;
  inst.domain = f.Numbers("domain", {0.0, 1.0});
  inst.probabilities = f.Numbers(
      "probabilities",
      std::vector<double>(inst.domain.size(),
                          inst.domain.empty() ? 0.0 : 1.0 / inst.domain.size()));
  inst.n = f.Integer("n", inst.n);
  inst.statistic = ParseEnum(f, "statistic", inst.statistic, ParseStatisticKind);
  inst.clip_threshold = f.Number("clip_threshold", inst.clip_threshold);
  inst.noise_scale = f.Number("noise_scale", inst.noise_scale);
  inst.mechanism = ParseEnum(f, "mechanism", inst.mechanism, ParseMechanismKind);
  inst.epochs = f.Integer("epochs", inst.epochs);
  inst.steps = f.Integer("steps", inst.steps);
  inst.batch_size = f.Integer("batch_size", inst.batch_size);
  inst.learning_rate = f.Number("learning_rate", inst.learning_rate);
  inst.theta0 = f.Number("theta0", inst.theta0);
  f.Finish();
  Checked(pointer, [&] { inst.Validate(); });
  return inst;
}

Json RecipeFields(const TrainingRecipe& r, bool with_dataset_size) {
  Json j;
  j["epochs"] = r.epochs;
  j["steps_per_epoch"] = r.steps_per_epoch;
  j["batch_size"] = r.batch_size;
  j["clip_threshold"] = NumberToJson(r.clip_threshold);
  j["noise_scale"] = NumberToJson(r.noise_scale);
  if (with_dataset_size) j["dataset_size"] = r.dataset_size;
  return j;
}

}  // namespace

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
}

Json NumberToJson(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Dataset LoadDataset(const DatasetConfig& config, std::uint64_t seed) {
  if (config.source == DatasetConfig::Source::kCsv) {
    try {
      return LoadCsv(config.path);
    } catch (const ParseError& e) {
      throw ConfigError("/dataset/path", config.path + ":" +
                                             std::to_string(e.line()) + ": " +
                                             e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/dataset/path", e.what());
    }
  }
  return SynthDataset(config.kind, config.n, config.features,
                      Rng(seed).Split("data").key(), config.separation);
}

CertifyConfig ParseCertifyConfig(const Json& json, const std::string& base_dir) {
  Fields f(json, "");
  CheckVersion(f);
  CertifyConfig c;
  PipelineConfig& p = c.pipeline;
  p.seed = f.Unsigned("seed", 0);
  c.dataset = ParseDataset(f.Need("dataset"), f.At("dataset"), base_dir);
  p.model = ParseModel(f.Find("model") ? *f.Find("model") : Json::object(),
                       f.At("model"), c.dataset);

  if (const Json* loss = f.Find("loss")) {
    Fields lf(*loss, f.At("loss"));
    p.train_loss.kind = LossKind::kClampedCrossEntropy;
    p.train_loss.clamp = lf.Number("clamp", p.train_loss.clamp);
    lf.Finish();
    if (!(p.train_loss.clamp > 0.0) || !std::isfinite(p.train_loss.clamp)) {
      throw ConfigError(lf.At("clamp"), "must be positive and finite");
    }
  }

  UpdateRule base_rule;
  if (const Json* training = f.Find("training")) {
    Fields tf(*training, f.At("training"));
    if (const Json* u = tf.Find("update")) {
      base_rule = ParseUpdateRule(*u, tf.At("update"));
    }
    p.init_scale = tf.Number("init_scale", p.init_scale);
    tf.Finish();
    if (!(p.init_scale >= 0.0) || !std::isfinite(p.init_scale)) {
      throw ConfigError(tf.At("init_scale"), "must be non-negative");
    }
  }

  const Json& recipes = f.Need("recipes");
  if (!recipes.is_array() || recipes.empty()) {
    throw ConfigError(f.At("recipes"), "expected a non-empty array");
  }
  for (std::size_t i = 0; i < recipes.size(); ++i) {
    const std::string ptr = f.At("recipes") + "/" + std::to_string(i);
    Json recipe_json = recipes[i];
    RecipeSpec spec;
    spec.rule = base_rule;
    if (recipe_json.is_object() && recipe_json.contains("learning_rates")) {
      const Json holder = Json::object({{"learning_rates", recipe_json["learning_rates"]}});
      Fields lr(holder, ptr);
      spec.rule.learning_rates = lr.Numbers("learning_rates", {});
      recipe_json.erase("learning_rates");
    }
    spec.recipe = ParseRecipe(recipe_json, ptr, false);
    spec.recipe.dataset_size = spec.recipe.steps_per_epoch * spec.recipe.batch_size;
    Checked(ptr, [&] {
      ValidateTrainingRecipe(spec.recipe);
      if (!(spec.recipe.noise_scale > 0.0)) {
        throw std::invalid_argument("noise_scale must be positive");
      }
      spec.rule.Validate(spec.recipe.steps_per_epoch);
    });
    p.recipes.push_back(std::move(spec));
  }

  p.prior_variances = f.Numbers("prior_variances", {});
  if (p.prior_variances.empty()) {
    throw ConfigError(f.At("prior_variances"), "expected a non-empty array");
  }
  for (std::size_t j = 0; j < p.prior_variances.size(); ++j) {
    const double tau = p.prior_variances[j];
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw ConfigError(f.At("prior_variances") + "/" + std::to_string(j),
                        "must be positive and finite");
    }
  }

  if (const Json* conf = f.Find("confidence")) {
    Fields cf(*conf, f.At("confidence"));
    p.split.delta = cf.Number("delta", p.split.delta);
    p.split.delta_prime = cf.Number("delta_prime", p.split.delta_prime);
    p.split.beta = cf.Number("beta", p.split.beta);
    cf.Finish();
    Checked(f.At("confidence"), [&] { p.split.Validate(); });
  }

  if (const Json* post = f.Find("posterior")) {
    Fields pf(*post, f.At("posterior"));
    p.budget.steps = pf.Integer("steps", p.budget.steps);
    p.budget.learning_rate = pf.Number("learning_rate", p.budget.learning_rate);
    p.budget.draws_per_step = pf.Integer("draws_per_step", p.budget.draws_per_step);
    p.budget.max_halvings =
        static_cast<int>(pf.Integer("max_halvings", p.budget.max_halvings));
    pf.Finish();
    if (p.budget.steps < 0) throw ConfigError(pf.At("steps"), "must be >= 0");
    if (!(p.budget.learning_rate > 0.0) || !std::isfinite(p.budget.learning_rate)) {
      throw ConfigError(pf.At("learning_rate"), "must be positive");
    }
    if (p.budget.draws_per_step < 1) {
      throw ConfigError(pf.At("draws_per_step"), "must be >= 1");
    }
    if (p.budget.max_halvings < 0 || p.budget.max_halvings > 100) {
      throw ConfigError(pf.At("max_halvings"), "must be in [0, 100]");
    }
  }
  p.final_draws = f.Integer("final_draws", p.final_draws);
  if (p.final_draws < 1) throw ConfigError(f.At("final_draws"), "must be >= 1");
  p.data_independent_baseline =
      f.Boolean("data_independent_baseline", p.data_independent_baseline);
  f.Finish();
  Checked("", [&] { p.Validate(); });
  return c;
}

Json ToJson(const TrainingRecipe& recipe) { return RecipeFields(recipe, true); }

Json ToJson(const UpdateRule& rule) {
  Json j;
  j["kind"] = UpdateKindName(rule.kind);
  j["learning_rates"] = Json::array();
  for (double lr : rule.learning_rates) j["learning_rates"].push_back(lr);
  j["momentum"] = rule.momentum;
  j["weight_decay"] = rule.weight_decay;
  j["second_moment"] = rule.second_moment;
  j["epsilon"] = rule.epsilon;
  return j;
}

Json ToJson(const CertifyConfig& config) {
  const PipelineConfig& p = config.pipeline;
  Json j;
  j["version"] = kConfigVersion;
  j["seed"] = p.seed;
  Json d;
  if (config.dataset.source == DatasetConfig::Source::kCsv) {
    d["source"] = "csv";
    d["path"] = config.dataset.path;
  } else {
    d["source"] = "synthetic";
    d["kind"] = SynthKindName(config.dataset.kind);
    d["n"] = config.dataset.n;
    d["features"] = config.dataset.features;
    d["separation"] = config.dataset.separation;
  }
  j["dataset"] = d;
  Json model;
  model["architecture"] = ArchitectureName(p.model.architecture);
  model["hidden"] = p.model.hidden;
  model["input_dim"] = p.model.input_dim;
  model["num_classes"] = p.model.num_classes;
  j["model"] = model;
  j["loss"] = Json{{"clamp", p.train_loss.clamp}};
  Json training;
  training["update"] = ToJson(p.recipes.front().rule);
  training["init_scale"] = p.init_scale;
  j["training"] = training;
  j["recipes"] = Json::array();
  for (const RecipeSpec& spec : p.recipes) {
    Json r = RecipeFields(spec.recipe, false);
    r["learning_rates"] = spec.rule.learning_rates;
    j["recipes"].push_back(r);
  }
  j["prior_variances"] = p.prior_variances;
  j["confidence"] = Json{{"delta", p.split.delta},
                         {"delta_prime", p.split.delta_prime},
                         {"beta", p.split.beta}};
  j["posterior"] = Json{{"steps", p.budget.steps},
                        {"learning_rate", p.budget.learning_rate},
                        {"draws_per_step", p.budget.draws_per_step},
                        {"max_halvings", p.budget.max_halvings}};
  j["final_draws"] = p.final_draws;
  j["data_independent_baseline"] = p.data_independent_baseline;
  return j;
}

OracleSuiteConfig ParseOracleSuiteConfig(const Json& json) {
  Fields f(json, "");
  CheckVersion(f);
  OracleSuiteConfig suite;
  suite.seed = f.Unsigned("seed", 0);
  const Json& cases = f.Need("cases");
  if (!cases.is_array() || cases.empty()) {
    throw ConfigError(f.At("cases"), "expected a non-empty array");
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string ptr = f.At("cases") + "/" + std::to_string(i);
    Fields cf(cases[i], ptr);
    OracleCase c;
    c.name = cf.String("name", "case" + std::to_string(i));
    c.instance = ParseInstance(cf.Need("instance"), cf.At("instance"));
    c.method = ParseEnum(cf, "method",
                         c.instance.mechanism == MechanismKind::kSingleShot
                             ? BoundMethod::kGaussianSingle
                             : BoundMethod::kOptimized,
                         ParseBoundMethod);
    c.beta = cf.Number("beta", c.beta);
    c.trials = cf.Integer("trials", c.trials);
    c.threshold_scale = cf.Number("threshold_scale", c.threshold_scale);
    c.repeats = cf.Integer("repeats", c.repeats);
    cf.Finish();
    if (!(c.beta > 0.0 && c.beta < 1.0)) {
      throw ConfigError(cf.At("beta"), "must lie in (0, 1)");
    }
    if (c.trials < 1) throw ConfigError(cf.At("trials"), "must be >= 1");
    if (!(c.threshold_scale >= 0.0) || !std::isfinite(c.threshold_scale)) {
      throw ConfigError(cf.At("threshold_scale"), "must be non-negative");
    }
    if (c.repeats < 1) throw ConfigError(cf.At("repeats"), "must be >= 1");
    const bool single = c.instance.mechanism == MechanismKind::kSingleShot;
    const bool matched =
        single ? c.method == BoundMethod::kGaussianSingle
               : (c.method == BoundMethod::kOptimized ||
                  c.method == BoundMethod::kExplicit);
    if (!matched) {
      throw ConfigError(cf.At("method"), "method does not match the mechanism");
    }
    suite.cases.push_back(std::move(c));
  }
  f.Finish();
  return suite;
}

Json ToJson(const TinyInstance& inst) {
  Json j;
  j["domain"] = inst.domain;
  j["probabilities"] = inst.probabilities;
  j["n"] = inst.n;
  j["statistic"] = StatisticKindName(inst.statistic);
  j["clip_threshold"] = inst.clip_threshold;
  j["noise_scale"] = inst.noise_scale;
  j["mechanism"] = MechanismKindName(inst.mechanism);
  if (inst.mechanism == MechanismKind::kDpsgdChain) {
    j["epochs"] = inst.epochs;
    j["steps"] = inst.steps;
    j["batch_size"] = inst.batch_size;
    j["learning_rate"] = inst.learning_rate;
    j["theta0"] = inst.theta0;
  }
  return j;
}

Json ToJson(const OracleSuiteConfig& config) {
  Json j;
  j["version"] = kConfigVersion;
  j["seed"] = config.seed;
  j["cases"] = Json::array();
  for (const OracleCase& c : config.cases) {
    j["cases"].push_back(Json{{"name", c.name},
                              {"instance", ToJson(c.instance)},
                              {"method", BoundMethodName(c.method)},
                              {"beta", c.beta},
                              {"trials", c.trials},
                              {"threshold_scale", c.threshold_scale},
                              {"repeats", c.repeats}});
  }
  return j;
}

KappaConfig ParseKappaConfig(const Json& json) {
  Fields f(json, "");
  CheckVersion(f);
  KappaConfig k;
  k.recipe = ParseRecipe(f.Need("recipe"), f.At("recipe"), true);
  k.beta = f.Number("beta", k.beta);
  k.epsilon = f.Number("epsilon", k.epsilon);
  f.Finish();
  Checked(f.At("recipe"), [&] { k.recipe.Validate(); });
  if (!(k.beta > 0.0 && k.beta < 1.0)) {
    throw ConfigError(f.At("beta"), "must lie in (0, 1)");
  }
  if (!(k.epsilon >= 0.0) || !std::isfinite(k.epsilon)) {
    throw ConfigError(f.At("epsilon"), "must be non-negative");
  }
  return k;
}

Json ToJson(const KappaConfig& config) {
  Json j;
  j["version"] = kConfigVersion;
  j["recipe"] = ToJson(config.recipe);
  j["beta"] = config.beta;
  j["epsilon"] = config.epsilon;
  return j;
}

FigureConfig ParseFigureConfig(const Json& json) {
  Fields f(json, "");
  CheckVersion(f);
  FigureConfig c;
  c.epochs = f.Integer("epochs", c.epochs);
  c.steps_per_epoch = f.Integer("steps_per_epoch", c.steps_per_epoch);
  c.batch_size = f.Integer("batch_size", c.batch_size);
  c.beta = f.Number("beta", c.beta);
  c.n_grid = f.Integers("n_grid", c.n_grid);
  c.ratio_grid = f.Numbers("ratio_grid", c.ratio_grid);
  c.delta_grid = f.Numbers("delta_grid", c.delta_grid);
  f.Finish();
  if (c.epochs < 1) throw ConfigError(f.At("epochs"), "must be >= 1");
  if (c.steps_per_epoch < 1) throw ConfigError(f.At("steps_per_epoch"), "must be >= 1");
  if (c.batch_size < 1) throw ConfigError(f.At("batch_size"), "must be >= 1");
  if (!(c.beta > 0.0 && c.beta < 1.0)) {
    throw ConfigError(f.At("beta"), "must lie in (0, 1)");
  }
  if (c.n_grid.empty()) throw ConfigError(f.At("n_grid"), "must be non-empty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < c.steps_per_epoch * c.batch_size) {
      throw ConfigError(f.At("n_grid") + "/" + std::to_string(i),
                        "must be at least steps_per_epoch * batch_size");
    }
  }
  if (c.ratio_grid.empty()) throw ConfigError(f.At("ratio_grid"), "must be non-empty");
  for (std::size_t i = 0; i < c.ratio_grid.size(); ++i) {
    if (!(c.ratio_grid[i] > 0.0) || !std::isfinite(c.ratio_grid[i])) {
      throw ConfigError(f.At("ratio_grid") + "/" + std::to_string(i),
                        "must be positive");
    }
  }
  if (c.delta_grid.empty()) throw ConfigError(f.At("delta_grid"), "must be non-empty");
  for (std::size_t i = 0; i < c.delta_grid.size(); ++i) {
    if (!(c.delta_grid[i] > 0.0 && c.delta_grid[i] <= 1.0)) {
      throw ConfigError(f.At("delta_grid") + "/" + std::to_string(i),
                        "must lie in (0, 1]");
    }
  }
  return c;
}

Json ToJson(const FigureConfig& config) {
  Json j;
  j["version"] = kConfigVersion;
  j["epochs"] = config.epochs;
  j["steps_per_epoch"] = config.steps_per_epoch;
  j["batch_size"] = config.batch_size;
  j["beta"] = config.beta;
  j["n_grid"] = config.n_grid;
  j["ratio_grid"] = config.ratio_grid;
  j["delta_grid"] = config.delta_grid;
  return j;
}

}  // namespace dpcert
