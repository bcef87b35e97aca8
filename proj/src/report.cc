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

#include "dpcert/report.h"

#include <charconv>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpcert/rng.h"

namespace dpcert {

std::string CsvNumber(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::AddRow(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw std::invalid_argument("CsvTable: row width differs from header");
  }
  rows_.push_back(std::move(row));
}

namespace {

std::string Quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void AppendLine(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += Quote(fields[i]);
  }
  out += "\r\n";
}

}  // namespace

std::string CsvTable::ToString() const {
  std::string out;
  AppendLine(out, header_);
  for (const auto& row : rows_) AppendLine(out, row);
  return out;
}

Json Envelope(const std::string& command, std::uint64_t seed,
              const Json& config, const Json& outputs) {
  Json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["outputs"] = outputs;
  return j;
}

Json ToJson(const MaxInfoBound& bound) {
  Json j;
  j["value"] = NumberToJson(bound.value);
  j["beta"] = bound.beta;
  j["method"] = BoundMethodName(bound.method);
  j["minimizer"] = bound.minimizer ? NumberToJson(*bound.minimizer) : Json();
  if (bound.recipe) j["recipe"] = ToJson(*bound.recipe);
  return j;
}

Json ToJson(const RiskEstimate& estimate) {
  return Json{{"value", estimate.value},
              {"num_samples", estimate.num_samples},
              {"kind", RiskKindName(estimate.kind)}};
}

Json ToJson(const RiskCertificate& c) {
  Json j;
  j["empirical_risk"] = c.empirical_risk;
  j["empirical_risk_upper"] = c.empirical_risk_upper;
  j["kl_divergence"] = c.kl_divergence;
  j["kappa"] = ToJson(c.kappa);
  j["n"] = c.n;
  j["confidence"] = Json{{"delta", c.split.delta},
                         {"delta_prime", c.split.delta_prime},
                         {"beta", c.split.beta}};
  j["grid"] = Json{{"k1", c.grid.k1}, {"k2", c.grid.k2}};
  j["complexity"] = c.complexity;
  j["risk_upper_bound"] = c.risk_upper_bound;
  j["failure_probability"] = c.failure_probability;
  return j;
}

Json ToJson(const OracleVerdict& v) {
  Json j;
  j["method"] = BoundMethodName(v.method);
  j["beta"] = v.beta;
  j["kappa"] = NumberToJson(v.kappa);
  j["threshold_scale"] = v.threshold_scale;
  j["threshold"] = NumberToJson(v.threshold_scale * v.kappa);
  j["tail"] = v.tail.tail;
  j["radius"] = v.tail.radius;
  j["trials"] = v.tail.trials;
  j["exceedances"] = v.tail.exceedances;
  j["log_mean_exp_f"] = NumberToJson(v.log_mean_exp_f);
  j["pass"] = v.pass;
  return j;
}

namespace {

template <typename Compute>
Json Guarded(Compute&& compute) {
  try {
    return compute();
  } catch (const std::exception& e) {
    return Json{{"error", e.what()}};
  }
}

}  // namespace

Json KappaOutputs(const KappaConfig& config) {
  const TrainingRecipe& r = config.recipe;
  r.Validate();
  if (!(config.beta > 0.0 && config.beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1)");
  }
  const NoiseRatio ratio = NoiseRatio::Of(r);
  Json out;
  out["nu"] = ratio.nu;
  out["lambda_max"] = NumberToJson(ratio.lambda_max);
  const MaxInfoBound opt = MaxInfoDpsgdOptimized(r, config.beta);
  const MaxInfoBound expl = MaxInfoDpsgdExplicit(r, config.beta);
  out["optimized"] = ToJson(opt);
  out["explicit"] = ToJson(expl);
  out["optimized_le_explicit"] = opt.value <= expl.value;
  out["tau_optimized"] = Guarded([&] {
    const ScalarMinimum tau = TauOptimized(r.steps_per_epoch, ratio.nu, config.beta);
    return Json{{"value", NumberToJson(tau.value)},
                {"minimizer", NumberToJson(tau.argmin)}};
  });
  out["tau_closed_form"] = Guarded([&] {
    return Json{{"value", NumberToJson(TauClosedForm(r.steps_per_epoch, ratio.nu,
                                                     config.beta))}};
  });
  out["gaussian_single_step"] = Guarded([&] {
    return ToJson(MaxInfoGaussianMechanism(r.batch_size, r.clip_threshold,
                                           r.noise_scale, config.beta));
  });
  if (config.epsilon > 0.0) {
    out["pure_dp"] = Guarded([&] {
      return ToJson(MaxInfoPureDp(r.dataset_size, config.epsilon, config.beta));
    });
  }
  return out;
}

SweepSpec ParseSweep(const std::string& text) {
  const auto eq = text.find('=');
  const auto c1 = text.find(':', eq == std::string::npos ? 0 : eq);
  const auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (eq == std::string::npos || c1 == std::string::npos ||
      c2 == std::string::npos) {
    throw std::invalid_argument("sweep must look like name=lo:hi:count");
  }
  SweepSpec s;
  s.parameter = text.substr(0, eq);
  static const char* kNames[] = {"zeta", "sigma", "beta", "batch_size",
                                 "steps_per_epoch", "epochs"};
  bool known = false;
  for (const char* name : kNames) known = known || s.parameter == name;
  if (!known) {
    throw std::invalid_argument("unknown sweep parameter '" + s.parameter + "'");
  }
  auto parse_double = [&](const std::string& part) {
    double v = 0.0;
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (res.ec != std::errc() || res.ptr != part.data() + part.size() ||
        !std::isfinite(v)) {
      throw std::invalid_argument("bad sweep value '" + part + "'");
    }
    return v;
  };
  s.lo = parse_double(text.substr(eq + 1, c1 - eq - 1));
  s.hi = parse_double(text.substr(c1 + 1, c2 - c1 - 1));
  const std::string count = text.substr(c2 + 1);
  const auto res = std::from_chars(count.data(), count.data() + count.size(), s.count);
  if (res.ec != std::errc() || res.ptr != count.data() + count.size() ||
      s.count < 1) {
    throw std::invalid_argument("sweep count must be a positive integer");
  }
  if (s.hi < s.lo) throw std::invalid_argument("sweep needs lo <= hi");
  return s;
}

CsvTable KappaSweep(const KappaConfig& config, const SweepSpec& sweep) {
  CsvTable table({sweep.parameter, "kappa_optimized", "lambda", "kappa_explicit",
                  "tau_optimized", "tau_closed_form"});
  for (std::int64_t k = 0; k < sweep.count; ++k) {
    const double x =
        sweep.count == 1
            ? sweep.lo
            : sweep.lo + (sweep.hi - sweep.lo) * static_cast<double>(k) /
                             static_cast<double>(sweep.count - 1);
    KappaConfig c = config;
    const std::string& p = sweep.parameter;
    if (p == "zeta") c.recipe.clip_threshold = x;
    if (p == "sigma") c.recipe.noise_scale = x;
    if (p == "beta") c.beta = x;
    if (p == "batch_size") c.recipe.batch_size = std::llround(x);
    if (p == "steps_per_epoch") c.recipe.steps_per_epoch = std::llround(x);
    if (p == "epochs") c.recipe.epochs = std::llround(x);
    if (!(c.beta > 0.0 && c.beta < 1.0)) {
      throw std::invalid_argument("beta must lie in (0, 1)");
    }
    c.recipe.Validate();
    const MaxInfoBound opt = MaxInfoDpsgdOptimized(c.recipe, c.beta);
    const MaxInfoBound expl = MaxInfoDpsgdExplicit(c.recipe, c.beta);
    const double nu = NoiseRatio::Of(c.recipe).nu;
    const ScalarMinimum tau = TauOptimized(c.recipe.steps_per_epoch, nu, c.beta);
    table.AddRow({CsvNumber(x), CsvNumber(opt.value),
                  opt.minimizer ? CsvNumber(*opt.minimizer) : "",
                  CsvNumber(expl.value), CsvNumber(tau.value),
                  CsvNumber(TauClosedForm(c.recipe.steps_per_epoch, nu, c.beta))});
  }
  return table;
}

CsvTable FigureData(const FigureConfig& config) {
  CsvTable table({"n", "zeta_over_sigma", "delta", "kappa_optimized",
                  "kappa_explicit", "kappa_optimized_over_n",
                  "kappa_explicit_over_n", "log_term_over_n"});
  for (double ratio : config.ratio_grid) {
    for (std::int64_t n : config.n_grid) {
      TrainingRecipe r;
      r.epochs = config.epochs;
      r.steps_per_epoch = config.steps_per_epoch;
      r.batch_size = config.batch_size;
      r.clip_threshold = ratio;
      r.noise_scale = 1.0;
      r.dataset_size = n;
      r.Validate();
      const double opt = MaxInfoDpsgdOptimized(r, config.beta).value;
      const double expl = MaxInfoDpsgdExplicit(r, config.beta).value;
      const double nd = static_cast<double>(n);
      for (double delta : config.delta_grid) {
        const double log_term = std::log(4.0 * std::sqrt(nd) / delta) / nd;
        table.AddRow({std::to_string(n), CsvNumber(ratio), CsvNumber(delta),
                      CsvNumber(opt), CsvNumber(expl), CsvNumber(opt / nd),
                      CsvNumber(expl / nd), CsvNumber(log_term)});
      }
    }
  }
  return table;
}

namespace {

Json CellToJson(const CellResult& cell) {
  Json j;
  j["prior_kind"] = PriorKindName(cell.prior_kind);
  j["recipe_index"] = cell.recipe_index;
  j["variance_index"] = cell.variance_index;
  j["tau"] = cell.tau;
  j["ok"] = cell.ok;
  if (!cell.ok) {
    j["error"] = cell.error;
    return j;
  }
  j["prior_risk"] = ToJson(cell.prior_risk);
  j["prior_certificate"] = ToJson(cell.prior_certificate);
  const PosteriorResult& post = cell.posterior;
  j["posterior"] = Json{
      {"accepted_steps", post.accepted_steps},
      {"halvings", post.halvings},
      {"objective_initial", post.objective_trace.front()},
      {"objective_final", post.objective_trace.back()},
      {"surrogate_risk", post.final_objective.risk},
      {"kl", post.final_objective.kl},
      {"penalty", post.final_objective.penalty}};
  j["posterior_risk"] = ToJson(cell.posterior_risk);
  j["certificate"] = ToJson(cell.certificate);
  return j;
}

}  // namespace

CertifyOutcome RunCertify(const CertifyConfig& config) {
  const Dataset data = LoadDataset(config.dataset, config.pipeline.seed);
  const PipelineResult result = RunPipeline(config.pipeline, data);

  CertifyOutcome out;
  Json& o = out.outputs;
  o["dataset"] = Json{{"n", data.size()},
                      {"features", data.num_features},
                      {"classes", data.num_classes}};
  o["method"] = Json{
      {"posterior_objective",
       "clamped cross-entropy over fixed reparameterized draws + "
       "sqrt((KL + kappa + log(2 K1 K2 sqrt(n) / (delta - delta' - beta))) / (2 n))"},
      {"certificate", "kl inverse of the Monte-Carlo zero-one risk upper bound"},
      {"certified_loss", "zero_one"},
      {"kappa", "optimized, at beta / K1 per recipe"}};
  o["sweeps"] = Json::array();
  for (const SweepResult& sweep : result.sweeps) {
    Json s;
    s["prior_kind"] = PriorKindName(sweep.prior_kind);
    s["grid"] = Json{{"k1", sweep.grid.k1}, {"k2", sweep.grid.k2}};
    s["kappas"] = Json::array();
    for (const MaxInfoBound& k : sweep.kappas) s["kappas"].push_back(ToJson(k));
    s["cells"] = Json::array();
    for (const CellResult& cell : sweep.cells) s["cells"].push_back(CellToJson(cell));
    s["best"] = sweep.best ? Json(*sweep.best) : Json();
    o["sweeps"].push_back(s);
  }

  out.summary = CsvTable({"prior", "recipe", "tau", "prior_risk", "prior_bound",
                          "posterior_risk", "kappa", "kl", "posterior_bound"});
  o["summary"] = Json::array();
  for (const SummaryRow& row : Summarize(result)) {
    const std::string recipe =
        row.recipe_index < 0 ? "" : std::to_string(row.recipe_index);
    out.summary.AddRow({std::string(PriorKindName(row.prior_kind)), recipe,
                        CsvNumber(row.tau), CsvNumber(row.prior_risk),
                        CsvNumber(row.prior_bound), CsvNumber(row.posterior_risk),
                        CsvNumber(row.kappa), CsvNumber(row.kl),
                        CsvNumber(row.posterior_bound)});
    o["summary"].push_back(Json{{"prior", PriorKindName(row.prior_kind)},
                                {"recipe", row.recipe_index < 0 ? Json() : Json(row.recipe_index)},
                                {"tau", row.tau},
                                {"prior_risk", row.prior_risk},
                                {"prior_bound", row.prior_bound},
                                {"posterior_risk", row.posterior_risk},
                                {"kappa", row.kappa},
                                {"kl", row.kl},
                                {"posterior_bound", row.posterior_bound}});
  }
  return out;
}

OracleOutcome RunOracle(const OracleSuiteConfig& config) {
  OracleOutcome out;
  out.table = CsvTable({"case", "repeat", "seed", "method", "beta", "kappa",
                        "threshold", "tail", "radius", "pass"});
  out.all_pass = true;
  out.outputs["cases"] = Json::array();
  const Rng root(config.seed);
  for (std::size_t i = 0; i < config.cases.size(); ++i) {
    const OracleCase& c = config.cases[i];
    Json cj;
    cj["name"] = c.name;
    cj["runs"] = Json::array();
    bool pass = true;
    for (std::int64_t r = 0; r < c.repeats; ++r) {
      const std::uint64_t seed = root.Split(i).Split(r).key();
      const OracleVerdict v =
          ValidateBound(c.instance, c.method, c.beta, c.trials, seed,
                        c.threshold_scale);
      Json vj = ToJson(v);
      vj["seed"] = seed;
      cj["runs"].push_back(vj);
      pass = pass && v.pass;
      out.table.AddRow({c.name, std::to_string(r), std::to_string(seed),
                        std::string(BoundMethodName(v.method)), CsvNumber(v.beta),
                        CsvNumber(v.kappa), CsvNumber(v.threshold_scale * v.kappa),
                        CsvNumber(v.tail.tail), CsvNumber(v.tail.radius),
                        v.pass ? "true" : "false"});
    }
    cj["pass"] = pass;
    out.all_pass = out.all_pass && pass;
    out.outputs["cases"].push_back(cj);
  }
  out.outputs["all_pass"] = out.all_pass;
  return out;
}

}  // namespace dpcert
