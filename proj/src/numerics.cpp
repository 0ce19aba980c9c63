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

#include "artemis/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "artemis/error.hpp"

namespace artemis {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> y,
                         const char* what) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": lengths " +
                                              std::to_string(x.size()) + " vs " +
                                              std::to_string(y.size()));
  }
}

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double squared_norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double norm(std::span<const double> x) { return std::sqrt(squared_norm(x)); }

Vec64 l2_normalize(std::span<const double> x) {
  const double n = norm(x);
  if (!(n > kNormEpsilon)) {
    throw Error(ErrorCode::kNearZeroNorm, "l2_normalize: norm " + std::to_string(n));
  }
  Vec64 out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / n;
  return out;
}

Vec64 softmax(std::span<const double> x) {
  if (x.empty()) return {};
  const double top = *std::max_element(x.begin(), x.end());
  Vec64 out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Vec64 relu(std::span<const double> x) {
  Vec64 out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

Vec64 hadamard(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "hadamard");
  Vec64 out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return out;
}

Vec64 affine(std::span<const double> x, const Mat64& w, std::span<const double> b) {
  if (x.size() != w.rows || b.size() != w.cols) {
    throw Error(ErrorCode::kShapeMismatch,
                "affine: input " + std::to_string(x.size()) + ", weight " +
                    std::to_string(w.rows) + "x" + std::to_string(w.cols) + ", bias " +
                    std::to_string(b.size()));
  }
  Vec64 out(b.begin(), b.end());
  for (std::size_t i = 0; i < w.rows; ++i) {
    const double xi = x[i];
    const double* wr = w.values.data() + i * w.cols;
    for (std::size_t j = 0; j < w.cols; ++j) out[j] += xi * wr[j];
  }
  return out;
}

Vec64 mlp2(std::span<const double> m, const Mat64& w1, std::span<const double> b1,
           const Mat64& w2, std::span<const double> b2) {
  const Vec64 hidden = relu(affine(m, w1, b1));
  return affine(hidden, w2, b2);
}

double cosine(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "cosine");
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  const double nx = std::sqrt(xx), ny = std::sqrt(yy);
  if (!(nx > kNormEpsilon) || !(ny > kNormEpsilon)) {
    throw Error(ErrorCode::kNearZeroNorm, "cosine: zero-norm operand");
  }
  return std::clamp(xy / (nx * ny), -1.0, 1.0);
}

double weighted_cosine(std::span<const double> a, std::span<const double> x,
                       std::span<const double> y) {
  require_same_length(a, x, "weighted_cosine");
  require_same_length(a, y, "weighted_cosine");
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ax = a[i] * x[i];
    const double ay = a[i] * y[i];
    xy += ax * ay;
    xx += ax * ax;
    yy += ay * ay;
  }
  const double nx = std::sqrt(xx), ny = std::sqrt(yy);
  if (!(nx > kNormEpsilon) || !(ny > kNormEpsilon)) {
    throw Error(ErrorCode::kNearZeroNorm, "weighted_cosine: zero-norm reweighted operand");
  }
  return std::clamp(xy / (nx * ny), -1.0, 1.0);
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace artemis
