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

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "artemis/numerics.hpp"

namespace artemis {

struct GradCheckOptions {
  double step = 1e-3;
  double tolerance = 1e-4;  // relative
  // When both gradients are below abs_floor in magnitude the coordinate is
  // judged on absolute error against abs_tolerance instead.
  double abs_floor = 1e-6;
  double abs_tolerance = 1e-7;
  // Coordinates to probe; empty means all of them.
  std::vector<std::size_t> coordinates;
};

struct GradCheckEntry {
  std::size_t coordinate = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;  // relative, or absolute under the floor
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_error = 0.0;
  bool passed = true;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

// Compares `analytic` (the tape gradient of f at x) with central differences
// (f(x + h e_i) - f(x - h e_i)) / 2h.
GradCheckReport finite_diff_check(const ScalarFunction& f, std::span<const double> x,
                                  std::span<const double> analytic,
                                  const GradCheckOptions& options = {});

}  // namespace artemis
