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

// dpcert command-line tool. Exit codes: 0 success, 1 a validated bound was
// violated, 2 usage or configuration error.

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "dpcert/config.h"
#include "dpcert/errors.h"
#include "dpcert/report.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

constexpr char kFooter[] =
    "DP-SGD sums the clipped per-sample gradients of a batch and adds noise "
    "to the sum; it does not average. Learning rates therefore act on the "
    "sum: divide by the batch size to match averaged SGD.\n"
    "DPCERT_THREADS caps the number of worker threads.";

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "auto";
};

void AddCommon(CLI::App* cmd, CommonOptions& o, bool config_required) {
  CLI::Option* config = cmd->add_option("--config", o.config, "JSON config file");
  if (config_required) config->required();
  cmd->add_option("--seed", o.seed, "Top-level seed, overrides the config");
  cmd->add_option("--out", o.out, "Output file (default: stdout)");
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"auto", "json", "csv"}));
}

void Emit(const CommonOptions& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write '" + o.out + "'");
  f << text;
}

std::string JsonText(const dpcert::Json& j) { return j.dump(2) + "\n"; }

std::string BaseDir(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

class Timer {
 public:
  explicit Timer(std::string label)
      : label_(std::move(label)), start_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    const double s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start_)
                         .count();
    std::cerr << label_ << ": " << s << " s\n";
  }

 private:
  std::string label_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-information bounds for DP-SGD and PAC-Bayes risk "
               "certificates with DP-SGD priors.",
               "dpcert"};
  app.footer(kFooter);
  app.set_version_flag("--version", std::string(dpcert::kToolVersion));
  app.require_subcommand(1);

  CommonOptions kappa_opts;
  dpcert::KappaConfig kappa;
  std::string sweep;
  CLI::App* kappa_cmd = app.add_subcommand(
      "kappa", "Max-information bounds for one DP-SGD recipe, or a sweep (CSV)");
  AddCommon(kappa_cmd, kappa_opts, false);
  kappa_cmd->add_option("--E", kappa.recipe.epochs, "Epochs");
  kappa_cmd->add_option("--T", kappa.recipe.steps_per_epoch, "Steps per epoch");
  kappa_cmd->add_option("--m", kappa.recipe.batch_size, "Batch size");
  kappa_cmd->add_option("--zeta", kappa.recipe.clip_threshold, "Clipping threshold");
  kappa_cmd->add_option("--sigma", kappa.recipe.noise_scale, "Noise scale on the gradient sum");
  kappa_cmd->add_option("--n", kappa.recipe.dataset_size, "Dataset size (default T*m)");
  kappa_cmd->add_option("--beta", kappa.beta, "Failure probability");
  kappa_cmd->add_option("--epsilon", kappa.epsilon,
                        "Also report the pure epsilon-DP comparator");
  kappa_cmd->add_option("--sweep", sweep,
                        "name=lo:hi:count over zeta, sigma, beta, batch_size, "
                        "steps_per_epoch or epochs");

  CommonOptions figure_opts;
  CLI::App* figure_cmd = app.add_subcommand(
      "figure-data", "kappa/n and log(4 sqrt(n)/delta)/n curves as CSV");
  AddCommon(figure_cmd, figure_opts, false);

  CommonOptions certify_opts;
  std::string summary_path;
  CLI::App* certify_cmd = app.add_subcommand(
      "certify", "Train DP-SGD priors, optimize posteriors, emit certificates");
  AddCommon(certify_cmd, certify_opts, true);
  certify_cmd->add_option("--summary", summary_path, "Also write the summary CSV here");

  CommonOptions oracle_opts;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "Check max-information tails on enumerable instances");
  AddCommon(oracle_cmd, oracle_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (kappa_cmd->parsed()) {
      const CommonOptions& o = kappa_opts;
      dpcert::KappaConfig config = kappa;
      if (!o.config.empty()) {
        config = dpcert::ParseKappaConfig(dpcert::ReadJsonFile(o.config));
        // Flags given explicitly override the file.
        auto take = [&](const char* flag, auto& dst, const auto& src) {
          if (kappa_cmd->count(flag)) dst = src;
        };
        take("--E", config.recipe.epochs, kappa.recipe.epochs);
        take("--T", config.recipe.steps_per_epoch, kappa.recipe.steps_per_epoch);
        take("--m", config.recipe.batch_size, kappa.recipe.batch_size);
        take("--zeta", config.recipe.clip_threshold, kappa.recipe.clip_threshold);
        take("--sigma", config.recipe.noise_scale, kappa.recipe.noise_scale);
        take("--n", config.recipe.dataset_size, kappa.recipe.dataset_size);
        take("--beta", config.beta, kappa.beta);
        take("--epsilon", config.epsilon, kappa.epsilon);
      } else if (!kappa_cmd->count("--n")) {
        config.recipe.dataset_size =
            config.recipe.steps_per_epoch * config.recipe.batch_size;
      }
      if (!(config.beta > 0.0 && config.beta < 1.0)) {
        throw std::invalid_argument("--beta must lie in (0, 1)");
      }
      const std::uint64_t seed = o.seed.value_or(0);
      if (!sweep.empty()) {
        const dpcert::SweepSpec spec = dpcert::ParseSweep(sweep);
        const dpcert::CsvTable table = dpcert::KappaSweep(config, spec);
        if (o.format == "json") {
          dpcert::Json rows = dpcert::Json::array();
          for (const auto& row : table.rows()) {
            dpcert::Json r;
            for (std::size_t c = 0; c < row.size(); ++c) r[table.header()[c]] = row[c];
            rows.push_back(r);
          }
          dpcert::Json cfg = dpcert::ToJson(config);
          cfg["sweep"] = sweep;
          Emit(o, JsonText(dpcert::Envelope("kappa", seed, cfg, {{"sweep", rows}})));
        } else {
          Emit(o, table.ToString());
        }
        return kExitOk;
      }
      const dpcert::Json outputs = dpcert::KappaOutputs(config);
      if (o.format == "csv") {
        dpcert::CsvTable table({"kappa_optimized", "lambda", "kappa_explicit"});
        const dpcert::MaxInfoBound opt =
            dpcert::MaxInfoDpsgdOptimized(config.recipe, config.beta);
        table.AddRow({dpcert::CsvNumber(opt.value),
                      opt.minimizer ? dpcert::CsvNumber(*opt.minimizer) : "",
                      dpcert::CsvNumber(
                          dpcert::MaxInfoDpsgdExplicit(config.recipe, config.beta).value)});
        Emit(o, table.ToString());
      } else {
        Emit(o, JsonText(dpcert::Envelope("kappa", seed, dpcert::ToJson(config), outputs)));
      }
      return kExitOk;
    }

    if (figure_cmd->parsed()) {
      const CommonOptions& o = figure_opts;
      dpcert::FigureConfig config;
      if (!o.config.empty()) {
        config = dpcert::ParseFigureConfig(dpcert::ReadJsonFile(o.config));
      }
      const dpcert::CsvTable table = dpcert::FigureData(config);
      if (o.format == "json") {
        dpcert::Json rows = dpcert::Json::array();
        for (const auto& row : table.rows()) {
          dpcert::Json r;
          for (std::size_t c = 0; c < row.size(); ++c) r[table.header()[c]] = row[c];
          rows.push_back(r);
        }
        Emit(o, JsonText(dpcert::Envelope("figure-data", o.seed.value_or(0),
                                          dpcert::ToJson(config), {{"rows", rows}})));
      } else {
        Emit(o, table.ToString());
      }
      return kExitOk;
    }

    if (certify_cmd->parsed()) {
      const CommonOptions& o = certify_opts;
      dpcert::CertifyConfig config = dpcert::ParseCertifyConfig(
          dpcert::ReadJsonFile(o.config), BaseDir(o.config));
      if (o.seed) config.pipeline.seed = *o.seed;
      dpcert::CertifyOutcome outcome;
      {
        Timer timer("certify");
        outcome = dpcert::RunCertify(config);
      }
      if (!summary_path.empty()) {
        std::ofstream f(summary_path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write '" + summary_path + "'");
        f << outcome.summary.ToString();
      }
      if (o.format == "csv") {
        Emit(o, outcome.summary.ToString());
      } else {
        Emit(o, JsonText(dpcert::Envelope("certify", config.pipeline.seed,
                                          dpcert::ToJson(config), outcome.outputs)));
      }
      return kExitOk;
    }

    if (oracle_cmd->parsed()) {
      const CommonOptions& o = oracle_opts;
      dpcert::OracleSuiteConfig config =
          dpcert::ParseOracleSuiteConfig(dpcert::ReadJsonFile(o.config));
      if (o.seed) config.seed = *o.seed;
      dpcert::OracleOutcome outcome;
      {
        Timer timer("oracle");
        outcome = dpcert::RunOracle(config);
      }
      if (o.format == "csv") {
        Emit(o, outcome.table.ToString());
      } else {
        Emit(o, JsonText(dpcert::Envelope("oracle", config.seed,
                                          dpcert::ToJson(config), outcome.outputs)));
      }
      return outcome.all_pass ? kExitOk : kExitViolation;
    }
  } catch (const dpcert::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
