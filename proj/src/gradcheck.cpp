/*
 * Copyright (c) 2026 The artemis-head Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "artemis/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "artemis/error.hpp"

namespace artemis {

GradCheckReport finite_diff_check(const ScalarFunction& f, std::span<const double> x,
                                  std::span<const double> analytic,
                                  const GradCheckOptions& options) {
  if (analytic.size() != x.size()) {
    throw Error(ErrorCode::kShapeMismatch, "finite_diff_check: gradient length " +
                                               std::to_string(analytic.size()) + " for " +
                                               std::to_string(x.size()) + " parameters");
  }
  if (!all_finite(analytic)) {
    throw Error(ErrorCode::kNonFiniteGradient, "finite_diff_check: analytic gradient");
  }
  std::vector<std::size_t> coords = options.coordinates;
  if (coords.empty()) {
    coords.resize(x.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  }
  Vec64 probe(x.begin(), x.end());
  GradCheckReport report;
  report.entries.reserve(coords.size());
  for (std::size_t i : coords) {
    if (i >= x.size()) throw Error(ErrorCode::kShapeMismatch, "finite_diff_check: coordinate");
    const double saved = probe[i];
    probe[i] = saved + options.step;
    const double up = f(probe);
    probe[i] = saved - options.step;
    const double down = f(probe);
    probe[i] = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    if (!std::isfinite(numeric)) {
      throw Error(ErrorCode::kNonFiniteGradient, "finite_diff_check: numeric gradient");
    }
    GradCheckEntry e;
    e.coordinate = i;
    e.analytic = analytic[i];
    e.numeric = numeric;
    const double diff = std::abs(e.analytic - e.numeric);
    const double scale = std::max(std::abs(e.analytic), std::abs(e.numeric));
    if (scale < options.abs_floor) {
      e.error = diff;
      e.passed = diff <= options.abs_tolerance;
    } else {
      e.error = diff / scale;
      e.passed = e.error <= options.tolerance;
    }
    report.max_error = std::max(report.max_error, e.error);
    report.passed = report.passed && e.passed;
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace artemis
