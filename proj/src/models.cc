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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "dpcert/errors.h"
#include "dpcert/parallel.h"

namespace dpcert {
namespace {

// Forward/backward workspace for one parameter vector.
class Network {
 public:
  Network(const ModelSpec& spec, std::span<const double> params)
      : widths_(spec.LayerWidths()), params_(params) {
    if (params.size() != spec.ParameterCount()) {
      throw std::invalid_argument(
          "parameter vector has " + std::to_string(params.size()) +
          " entries, model expects " + std::to_string(spec.ParameterCount()));
    }
    pre_.resize(widths_.size());
    act_.resize(widths_.size());
    for (std::size_t l = 0; l < widths_.size(); ++l) {
      pre_[l].assign(widths_[l], 0.0);
      act_[l].assign(widths_[l], 0.0);
    }
  }

  // Returns the logits.
  std::span<const double> Forward(std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(widths_[0])) {
      throw std::invalid_argument("sample has " + std::to_string(x.size()) +
                                  " features, model expects " +
                                  std::to_string(widths_[0]));
    }
    std::copy(x.begin(), x.end(), act_[0].begin());
    std::size_t offset = 0;
    const std::size_t last = widths_.size() - 1;
    for (std::size_t l = 1; l <= last; ++l) {
      const std::size_t in = widths_[l - 1], out = widths_[l];
      const double* w = params_.data() + offset;
      const double* b = w + in * out;
      for (std::size_t o = 0; o < out; ++o) {
        double z = b[o];
        const double* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) z += row[i] * act_[l - 1][i];
        pre_[l][o] = z;
        act_[l][o] = l == last ? z : std::max(0.0, z);
      }
      offset += in * out + out;
    }
    return act_[last];
  }

  // Accumulates d(loss)/d(params) into `gradient` given d(loss)/d(logits)
  // for the most recent Forward call.
  void Backward(std::vector<double> delta, std::span<double> gradient) {
    std::size_t offset = params_.size();
    for (std::size_t l = widths_.size() - 1; l >= 1; --l) {
      const std::size_t in = widths_[l - 1], out = widths_[l];
      offset -= in * out + out;
      const double* w = params_.data() + offset;
      double* gw = gradient.data() + offset;
      double* gb = gw + in * out;
      for (std::size_t o = 0; o < out; ++o) {
        gb[o] = delta[o];
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] = delta[o] * act_[l - 1][i];
      }
      if (l == 1) break;
      std::vector<double> prev(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
      }
      for (std::size_t i = 0; i < in; ++i) {
        if (!(pre_[l - 1][i] > 0.0)) prev[i] = 0.0;
      }
      delta = std::move(prev);
    }
  }

 private:
  std::vector<std::int64_t> widths_;
  std::span<const double> params_;
  std::vector<std::vector<double>> pre_;
  std::vector<std::vector<double>> act_;
};

double SampleLoss(Network& net, std::span<const double> x, int label,
                  int num_classes, const BoundedLoss& loss,
                  std::span<double> gradient) {
  if (label < 0 || label >= num_classes) {
    throw std::invalid_argument("label " + std::to_string(label) +
                                " outside [0, " + std::to_string(num_classes) + ")");
  }
  const std::span<const double> logits = net.Forward(x);
  if (loss.kind == LossKind::kZeroOne) {
    if (!gradient.empty()) {
      throw std::invalid_argument("the zero-one loss has no gradient");
    }
    const auto arg = std::max_element(logits.begin(), logits.end());
    return (arg - logits.begin()) == label ? 0.0 : 1.0;
  }
  if (!(loss.clamp > 0.0)) {
    throw std::invalid_argument("loss clamp must be positive");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - top);
  const double log_norm = top + std::log(sum);
  const double ce = log_norm - logits[label];
  if (!gradient.empty()) {
    std::vector<double> delta(logits.size(), 0.0);
    if (ce < loss.clamp) {
      for (std::size_t c = 0; c < logits.size(); ++c) {
        delta[c] = std::exp(logits[c] - log_norm) / loss.clamp;
      }
      delta[label] -= 1.0 / loss.clamp;
    }
    net.Backward(std::move(delta), gradient);
  }
  return std::min(ce, loss.clamp) / loss.clamp;
}

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(Trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool ParseDouble(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool ParseLabel(const std::string& s, int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && out >= 0;
}

}  // namespace

void Dataset::Validate() const {
  if (labels.empty()) throw std::invalid_argument("dataset is empty");
  if (num_features < 1 || num_classes < 1) {
    throw std::invalid_argument("dataset needs p >= 1 features and C >= 1 classes");
  }
  if (features.size() != labels.size() * static_cast<std::size_t>(num_features)) {
    throw std::invalid_argument("dataset feature matrix does not match n x p");
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
    }
  }
}

std::string_view ArchitectureName(Architecture arch) {
  return arch == Architecture::kLinearSoftmax ? "linear_softmax" : "mlp";
}

Architecture ParseArchitecture(std::string_view name) {
  if (name == "linear_softmax") return Architecture::kLinearSoftmax;
  if (name == "mlp") return Architecture::kMlp;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

ModelSpec ModelSpec::LinearSoftmax(std::int64_t input_dim, int num_classes) {
  ModelSpec spec{Architecture::kLinearSoftmax, input_dim, num_classes, {}};
  spec.Validate();
  return spec;
}

ModelSpec ModelSpec::Mlp(std::int64_t input_dim,
                         std::vector<std::int64_t> hidden, int num_classes) {
  ModelSpec spec{Architecture::kMlp, input_dim, num_classes, std::move(hidden)};
  spec.Validate();
  return spec;
}

void ModelSpec::Validate() const {
  if (input_dim < 1) throw std::invalid_argument("model input_dim must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("model needs >= 2 classes");
  if (architecture == Architecture::kLinearSoftmax && !hidden.empty()) {
    throw std::invalid_argument("linear_softmax takes no hidden layers");
  }
  if (architecture == Architecture::kMlp && hidden.empty()) {
    throw std::invalid_argument("mlp needs at least one hidden layer");
  }
  for (std::int64_t w : hidden) {
    if (w < 1) throw std::invalid_argument("hidden widths must be >= 1");
  }
}

std::vector<std::int64_t> ModelSpec::LayerWidths() const {
  std::vector<std::int64_t> widths{input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(num_classes);
  return widths;
}

std::size_t ModelSpec::ParameterCount() const {
  const std::vector<std::int64_t> w = LayerWidths();
  std::size_t count = 0;
  for (std::size_t l = 1; l < w.size(); ++l) count += (w[l - 1] + 1) * w[l];
  return count;
}

std::string_view LossKindName(LossKind kind) {
  return kind == LossKind::kZeroOne ? "zero_one" : "clamped_cross_entropy";
}

LossKind ParseLossKind(std::string_view name) {
  if (name == "zero_one") return LossKind::kZeroOne;
  if (name == "clamped_cross_entropy") return LossKind::kClampedCrossEntropy;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

double LossAndGradient(const ModelSpec& spec, std::span<const double> params,
                       std::span<const double> x, int label,
                       const BoundedLoss& loss, std::span<double> gradient) {
  if (!gradient.empty() && gradient.size() != params.size()) {
    throw std::invalid_argument("gradient buffer has the wrong length");
  }
  Network net(spec, params);
  return SampleLoss(net, x, label, spec.num_classes, loss, gradient);
}

PerSampleGradient LossGradient(const ModelSpec& spec, const Dataset& data,
                               const BoundedLoss& loss) {
  spec.Validate();
  data.Validate();
  if (data.num_features != spec.input_dim) {
    throw std::invalid_argument("dataset has " + std::to_string(data.num_features) +
                                " features, model expects " +
                                std::to_string(spec.input_dim));
  }
  return [spec, &data, loss](std::int64_t index, std::span<const double> theta,
                             std::span<double> grad) {
    LossAndGradient(spec, theta, data.Row(index), data.labels[index], loss, grad);
  };
}

double Risk(const ModelSpec& spec, std::span<const double> params,
            const Dataset& data, const BoundedLoss& loss) {
  if (data.size() == 0) throw std::invalid_argument("Risk: empty dataset");
  Network net(spec, params);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += SampleLoss(net, data.Row(i), data.labels[i], spec.num_classes,
                        loss, {});
  }
  return total / static_cast<double>(data.size());
}

RiskEstimate McRiskOfStochasticModel(const ModelSpec& spec,
                                     const StochasticModel& model,
                                     const Dataset& data,
                                     const BoundedLoss& loss,
                                     std::int64_t num_draws,
                                     std::uint64_t seed) {
  if (num_draws < 1) throw std::invalid_argument("MC risk needs N >= 1 draws");
  model.Validate();
  if (model.dim() != spec.ParameterCount()) {
    throw std::invalid_argument("stochastic model dimension does not match the model");
  }
  std::vector<double> stddev(model.dim());
  for (std::size_t i = 0; i < model.dim(); ++i) {
    stddev[i] = std::sqrt(model.variance[i]);
  }
  const Rng root(seed);
  std::vector<double> risks(num_draws);
  ParallelFor(risks.size(), [&](std::size_t k) {
    Rng rng = root.Split(k);
    std::vector<double> theta(model.dim());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] = model.mean[i] + stddev[i] * rng.Normal();
    }
    risks[k] = Risk(spec, theta, data, loss);
  });
  double total = 0.0;
  for (double r : risks) total += r;
  return {total / static_cast<double>(num_draws), num_draws, RiskKind::kMonteCarlo};
}

std::vector<double> InitialParameters(const ModelSpec& spec, Rng& rng,
                                      double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("initialization scale must be finite and >= 0");
  }
  const std::vector<std::int64_t> widths = spec.LayerWidths();
  std::vector<double> params;
  params.reserve(spec.ParameterCount());
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const double a = scale / std::sqrt(static_cast<double>(widths[l - 1]));
    for (std::int64_t k = 0; k < widths[l - 1] * widths[l]; ++k) {
      params.push_back(a * (2.0 * rng.Uniform() - 1.0));
    }
    params.insert(params.end(), widths[l], 0.0);
  }
  return params;
}

std::string_view SynthKindName(SynthKind kind) {
  return kind == SynthKind::kTwoGaussians ? "two_gaussians" : "xor";
}

SynthKind ParseSynthKind(std::string_view name) {
  if (name == "two_gaussians") return SynthKind::kTwoGaussians;
  if (name == "xor") return SynthKind::kXor;
  throw std::invalid_argument("unknown synthetic dataset '" + std::string(name) + "'");
}

Dataset SynthDataset(SynthKind kind, std::int64_t n, std::int64_t p,
                     std::uint64_t seed, double separation) {
  if (n < 2) throw std::invalid_argument("synthetic dataset needs n >= 2");
  if (p < 1 || (kind == SynthKind::kXor && p < 2)) {
    throw std::invalid_argument("synthetic dataset has too few features");
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw std::invalid_argument("separation must be finite and >= 0");
  }
  Dataset data;
  data.num_features = p;
  data.num_classes = 2;
  data.provenance = Provenance::kSynthetic;
  data.features.reserve(n * p);
  data.labels.reserve(n);
  Rng rng(seed);
  const double shift = 0.5 * separation / std::sqrt(static_cast<double>(p));
  for (std::int64_t i = 0; i < n; ++i) {
    if (kind == SynthKind::kTwoGaussians) {
      const int y = static_cast<int>(i % 2);
      for (std::int64_t j = 0; j < p; ++j) {
        data.features.push_back((y == 1 ? shift : -shift) + rng.Normal());
      }
      data.labels.push_back(y);
    } else {
      for (std::int64_t j = 0; j < p; ++j) {
        data.features.push_back(2.0 * rng.Uniform() - 1.0);
      }
      const double* row = data.features.data() + i * p;
      data.labels.push_back((row[0] > 0.0) != (row[1] > 0.0) ? 1 : 0);
    }
  }
  return data;
}

Dataset LoadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  Dataset data;
  data.provenance = Provenance::kCsv;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 &&
        line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (Trim(line).empty()) continue;
    const std::vector<std::string> fields = SplitFields(line);
    std::vector<double> row;
    bool numeric = fields.size() >= 2;
    for (std::size_t k = 0; numeric && k + 1 < fields.size(); ++k) {
      double v;
      numeric = ParseDouble(fields[k], v);
      row.push_back(v);
    }
    int label = 0;
    const bool label_ok = numeric && ParseLabel(fields.back(), label);
    if (!label_ok) {
      if (line_no == 1 && data.labels.empty()) continue;  // header
      throw ParseError(path + ":" + std::to_string(line_no) +
                           ": expected numeric features and a non-negative "
                           "integer label",
                       line_no);
    }
    if (columns == 0) columns = fields.size();
    if (fields.size() != columns) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(columns) + " columns, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    data.features.insert(data.features.end(), row.begin(), row.end());
    data.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (data.labels.empty()) {
    throw std::invalid_argument("'" + path + "' contains no data rows");
  }
  data.num_features = static_cast<std::int64_t>(columns - 1);
  data.num_classes = std::max(2, max_label + 1);
  return data;
}

void WriteCsv(const Dataset& data, const std::string& path) {
  data.Validate();
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  for (std::int64_t j = 0; j < data.num_features; ++j) out << 'x' << j << ',';
  out << "label\r\n";
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.Row(i)) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << data.labels[i] << "\r\n";
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace dpcert
