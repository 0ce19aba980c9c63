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

// Reference implementations for tests. Plain loops in long double over the
// raw parameter storage; nothing here calls into the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "artemis/head.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline long double dot(const Vec& x, const Vec& y) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * y[i];
  return s;
}

inline double cosine(const Vec& x, const Vec& y) {
  return static_cast<double>(dot(x, y) / std::sqrt(dot(x, x) * dot(y, y)));
}

// Norm by Kahan-compensated summation of squares.
inline double compensated_norm(const Vec& x) {
  double sum = 0.0, carry = 0.0;
  for (double v : x) {
    const double y = v * v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return std::sqrt(sum);
}

inline Vec softmax(const Vec& x) {
  long double hi = x[0];
  for (double v : x) hi = std::max<long double>(hi, v);
  std::vector<long double> e(x.size());
  long double z = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(x[i]) - hi);
    z += e[i];
  }
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(e[i] / z);
  return out;
}

// y_j = sum_i x_i W[i][j] + b_j, W stored row-major with rows = inputs.
inline Vec layer(const Vec& x, const std::vector<double>& w, std::size_t cols, const Vec& b) {
  Vec out(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    long double s = b[j];
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * w[i * cols + j];
    out[j] = static_cast<double>(s);
  }
  return out;
}

inline Vec mlp(const Vec& m, const artemis::AttentionParams& a) {
  Vec h = layer(m, a.w1.values, a.w1.cols, a.b1);
  for (double& v : h) v = v > 0.0 ? v : 0.0;
  return layer(h, a.w2.values, a.w2.cols, a.b2);
}

inline Vec attention(const Vec& m, const artemis::AttentionParams& a) { return softmax(mlp(m, a)); }

inline Vec times(const Vec& x, const Vec& y) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return out;
}

inline double score_is(const Vec& r, const Vec& m, const Vec& t, const artemis::HeadParams& p) {
  const Vec a = attention(m, p.attn_is);
  return cosine(times(a, r), times(a, t));
}

inline double score_em(const Vec& m, const Vec& t, const artemis::HeadParams& p) {
  const Vec a = attention(m, p.attn_em);
  const Vec projected = layer(m, p.proj.w.values, p.proj.w.cols, p.proj.b);
  return cosine(projected, times(a, t));
}

inline double score(const Vec& r, const Vec& m, const Vec& t, const artemis::HeadParams& p,
                    artemis::Flavor flavor) {
  using artemis::Flavor;
  switch (flavor) {
    case Flavor::kImageOnly: return cosine(r, t);
    case Flavor::kTextOnly: return cosine(m, t);
    case Flavor::kLateFusion: {
      Vec f(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) f[i] = r[i] + m[i];
      return cosine(f, t);
    }
    case Flavor::kIsOnly: return score_is(r, m, t, p);
    case Flavor::kEmOnly: return score_em(m, t, p);
    case Flavor::kArtemis: return score_em(m, t, p) + score_is(r, m, t, p);
  }
  return 0.0;
}

// mean_i [ -gamma s_ii + log sum_j exp(gamma s_ij) ] over a square matrix.
inline double bbc(const std::vector<Vec>& s, double gamma) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i) {
    long double z = 0.0L;
    for (double v : s[i]) z += std::exp(static_cast<long double>(gamma) * v);
    total += std::log(z) - static_cast<long double>(gamma) * s[i][i];
  }
  return static_cast<double>(total / s.size());
}

// Candidates scoring strictly higher, plus tied candidates with a smaller id.
inline std::size_t brute_rank(const std::vector<double>& row, const std::vector<std::string>& ids,
                              std::size_t target) {
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j == target) continue;
    if (row[j] > row[target] || (row[j] == row[target] && ids[j] < ids[target])) ++ahead;
  }
  return ahead + 1;
}

inline Vec random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

inline Vec random_unit(std::size_t n, std::mt19937_64& rng) {
  Vec v = random_vec(n, rng);
  const double nrm = std::sqrt(static_cast<double>(dot(v, v)));
  for (double& x : v) x /= nrm;
  return v;
}

// Head with every block (biases included) randomized, so tests do not lean
// on the zero-bias init.
inline artemis::HeadParams random_head(const artemis::HeadDims& dims, std::mt19937_64& rng) {
  artemis::HeadParams p = artemis::init_params(dims, rng());
  std::normal_distribution<double> bias(0.0, 0.1);
  for (Vec* b : {&p.attn_is.b1, &p.attn_is.b2, &p.attn_em.b1, &p.attn_em.b2, &p.proj.b}) {
    for (double& x : *b) x = bias(rng);
  }
  p.gamma = std::uniform_real_distribution<double>(1.0, 10.0)(rng);
  return p;
}

}  // namespace oracle
