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

#ifndef DPCERT_MINIMIZE_H_
#define DPCERT_MINIMIZE_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace dpcert {

struct ScalarMinimum {
  double argmin = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

struct GridRefineOptions {
  std::size_t grid_points = 4096;
  int golden_iterations = 60;
};

// Minimizes f over the log-spaced grid on [lo, hi] (0 < lo < hi), then
// refines around the best grid point with golden-section search inside the
// bracket formed by its two neighbours. The returned point is always one
// at which f was actually evaluated, so the value is an upper bound on the
// true infimum even when the objective is not unimodal. Non-finite
// evaluations are treated as +infinity.
template <typename Objective>
ScalarMinimum MinimizeLogGridThenGolden(Objective&& f, double lo, double hi,
                                        const GridRefineOptions& options = {}) {
  if (!(lo > 0.0) || !(hi > lo) || options.grid_points < 2) {
    throw std::invalid_argument("MinimizeLogGridThenGolden: need 0 < lo < hi");
  }
  auto eval = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  const double log_lo = std::log(lo);
  const double step =
      (std::log(hi) - log_lo) / static_cast<double>(options.grid_points - 1);
  auto grid_at = [&](std::size_t i) {
    if (i == 0) return lo;
    if (i + 1 == options.grid_points) return hi;
    return std::exp(log_lo + step * static_cast<double>(i));
  };

  ScalarMinimum best;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < options.grid_points; ++i) {
    const double x = grid_at(i);
    const double v = eval(x);
    if (v < best.value) {
      best = {x, v};
      best_index = i;
    }
  }
  if (!std::isfinite(best.value)) return best;

  double a = grid_at(best_index == 0 ? 0 : best_index - 1);
  double b = grid_at(std::min(best_index + 1, options.grid_points - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (int it = 0; it < options.golden_iterations; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  if (fc < best.value) best = {c, fc};
  if (fd < best.value) best = {d, fd};
  return best;
}

}  // namespace dpcert

#endif  // DPCERT_MINIMIZE_H_
