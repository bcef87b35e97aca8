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

// Report emission shared by the command-line tool and the tests: the JSON
// report envelope, RFC 4180 CSV tables, and one runner per subcommand.

#ifndef DPCERT_REPORT_H_
#define DPCERT_REPORT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dpcert/certify.h"
#include "dpcert/config.h"
#include "dpcert/oracle.h"
#include "dpcert/pac_bayes.h"

namespace dpcert {

inline constexpr char kToolName[] = "dpcert";
inline constexpr char kToolVersion[] = "0.1.0";

// Shortest round-trip decimal; "inf", "-inf" or "nan" otherwise.
std::string CsvNumber(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  // Throws std::invalid_argument when the width differs from the header.
  void AddRow(std::vector<std::string> row);
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  const std::vector<std::string>& header() const { return header_; }
  // Quoted where needed, CRLF line endings.
  std::string ToString() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// {"tool", "version", "command", "seed", "config", "outputs"}.
Json Envelope(const std::string& command, std::uint64_t seed,
              const Json& config, const Json& outputs);

Json ToJson(const MaxInfoBound& bound);
Json ToJson(const RiskEstimate& estimate);
Json ToJson(const RiskCertificate& certificate);
Json ToJson(const OracleVerdict& verdict);

// Every bound the toolkit computes for one recipe.
Json KappaOutputs(const KappaConfig& config);

// `name=lo:hi:count` with name one of zeta, sigma, beta, batch_size,
// steps_per_epoch, epochs; count evenly spaced values including both ends.
struct SweepSpec {
  std::string parameter;
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t count = 1;
};
// Throws std::invalid_argument on malformed specs.
SweepSpec ParseSweep(const std::string& text);
CsvTable KappaSweep(const KappaConfig& config, const SweepSpec& sweep);

// kappa / n and log(4 sqrt(n) / delta) / n over the configured grids.
CsvTable FigureData(const FigureConfig& config);

struct CertifyOutcome {
  Json outputs;
  CsvTable summary{{}};
};
CertifyOutcome RunCertify(const CertifyConfig& config);

struct OracleOutcome {
  Json outputs;
  CsvTable table{{}};
  bool all_pass = false;
};
OracleOutcome RunOracle(const OracleSuiteConfig& config);

}  // namespace dpcert

#endif  // DPCERT_REPORT_H_
