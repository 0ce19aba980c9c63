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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "artemis/numerics.hpp"
#include "artemis/tape.hpp"

namespace artemis {

struct HeadDims {
  std::size_t text = 512;    // H_T, modifier embedding width
  std::size_t image = 512;   // H_I, image embedding width
  std::size_t hidden = 512;  // attention MLP hidden width

  friend bool operator==(const HeadDims&, const HeadDims&) = default;
};

// Two-layer MLP text -> hidden -> image, followed by a softmax when used as
// an attention map.
struct AttentionParams {
  Mat64 w1;  // text x hidden
  Vec64 b1;  // hidden
  Mat64 w2;  // hidden x image
  Vec64 b2;  // image

  friend bool operator==(const AttentionParams&, const AttentionParams&) = default;
};

// Linear map from text space to image space.
struct ProjectionParams {
  Mat64 w;  // text x image
  Vec64 b;  // image

  friend bool operator==(const ProjectionParams&, const ProjectionParams&) = default;
};

struct HeadParams {
  HeadDims dims;
  AttentionParams attn_is;
  AttentionParams attn_em;
  ProjectionParams proj;
  double gamma = 10.0;

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

inline constexpr double kInitialGamma = 10.0;
inline constexpr double kMinGamma = 1e-3;

enum class Flavor { kImageOnly, kTextOnly, kLateFusion, kIsOnly, kEmOnly, kArtemis };

// Fixed report order, one entry per ablation row.
inline constexpr std::array<Flavor, 6> kAllFlavors = {
    Flavor::kImageOnly, Flavor::kTextOnly, Flavor::kLateFusion,
    Flavor::kIsOnly,    Flavor::kEmOnly,   Flavor::kArtemis};

std::string_view flavor_name(Flavor flavor);
Flavor parse_flavor(std::string_view name);

enum class AttentionKind { kImplicitSimilarity, kExplicitMatching };

// Zero-initialized blocks with the right shapes.
HeadParams zero_params(const HeadDims& dims);

// Glorot-uniform weights, zero biases, gamma = kInitialGamma.
HeadParams init_params(const HeadDims& dims, std::uint64_t seed);

void validate_params(const HeadParams& params);

Vec64 attention(std::span<const double> m, AttentionKind which, const HeadParams& params);
Vec64 project_text(std::span<const double> m, const HeadParams& params);

double score_is(std::span<const double> r, std::span<const double> m,
                std::span<const double> t, const HeadParams& params);
double score_em(std::span<const double> m, std::span<const double> t, const HeadParams& params);
double score(std::span<const double> r, std::span<const double> m, std::span<const double> t,
             const HeadParams& params, Flavor flavor);

std::uint64_t head_param_count(const HeadParams& params);
std::uint64_t head_param_count(const HeadDims& dims);
std::uint64_t head_mac_count(const HeadDims& dims);

// Visits the trainable blocks in checkpoint order:
// attn_is.{w1,b1,w2,b2}, attn_em.{w1,b1,w2,b2}, proj.{w,b}. Gamma is handled
// separately by callers because it is a scalar with its own constraints.
template <typename Params, typename Fn>
void for_each_block(Params& params, Fn&& fn) {
  fn(params.attn_is.w1.values);
  fn(params.attn_is.b1);
  fn(params.attn_is.w2.values);
  fn(params.attn_is.b2);
  fn(params.attn_em.w1.values);
  fn(params.attn_em.b1);
  fn(params.attn_em.w2.values);
  fn(params.attn_em.b2);
  fn(params.proj.w.values);
  fn(params.proj.b);
}

// Flattened copy of every trainable scalar (blocks in checkpoint order, then
// gamma) and the inverse.
Vec64 flatten(const HeadParams& params);
HeadParams unflatten(std::span<const double> flat, const HeadDims& dims);

// Parameters bound onto a tape as differentiable leaves.
struct HeadVars {
  struct Attention {
    Tape::Var w1, b1, w2, b2;
  };
  Attention attn_is;
  Attention attn_em;
  Tape::Var proj_w, proj_b;
  Tape::Var gamma;
};

HeadVars bind_params(Tape& tape, const HeadParams& params);

// Gradient of a scalar root with respect to every parameter, laid out like
// HeadParams (gamma slot holds d/d gamma).
HeadParams collect_grads(Tape& tape, const HeadVars& vars, const HeadDims& dims);

// Query-side tape quantities for one modifier, shared across all targets.
struct TapeQuery {
  Tape::Var r;
  Tape::Var a_is;
  Tape::Var a_em;
  Tape::Var projected;
  Tape::Var fused;  // r + m for late fusion
  Tape::Var m;
};

TapeQuery tape_query(Tape& tape, const HeadVars& vars, Tape::Var r, Tape::Var m, Flavor flavor);
Tape::Var tape_score(Tape& tape, const TapeQuery& query, Tape::Var t, Flavor flavor);

}  // namespace artemis
