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
#include <span>
#include <vector>

namespace artemis {

inline constexpr double kNormEpsilon = 1e-12;

using Vec64 = std::vector<double>;

// Row-major dense matrix. For layer weights rows = fan-in and cols = fan-out,
// so y = x^T W, i.e. y[j] = sum_i x[i] * W(i, j).
struct Mat64 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Mat64() = default;
  Mat64(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

  friend bool operator==(const Mat64&, const Mat64&) = default;
};

// Sequential ascending-index reductions; the fixed order keeps score ties
// reproducible bit-for-bit.
double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);
double norm(std::span<const double> x);

Vec64 l2_normalize(std::span<const double> x);
Vec64 softmax(std::span<const double> x);
Vec64 relu(std::span<const double> x);
Vec64 hadamard(std::span<const double> x, std::span<const double> y);

// x^T W + b.
Vec64 affine(std::span<const double> x, const Mat64& w, std::span<const double> b);

// W2-layer applied to relu of the W1-layer; no output nonlinearity.
Vec64 mlp2(std::span<const double> m, const Mat64& w1, std::span<const double> b1,
           const Mat64& w2, std::span<const double> b2);

double cosine(std::span<const double> x, std::span<const double> y);

// cos(a*x, a*y) with * the elementwise product.
double weighted_cosine(std::span<const double> a, std::span<const double> x,
                       std::span<const double> y);

bool all_finite(std::span<const double> x);

}  // namespace artemis
