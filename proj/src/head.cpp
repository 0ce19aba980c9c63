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

#include "artemis/head.hpp"

#include <cmath>
#include <random>
#include <string>

#include "artemis/error.hpp"

namespace artemis {

namespace {

void glorot_fill(Mat64& w, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : w.values) v = dist(rng);
}

AttentionParams zero_attention(const HeadDims& dims) {
  return {Mat64(dims.text, dims.hidden), Vec64(dims.hidden, 0.0),
          Mat64(dims.hidden, dims.image), Vec64(dims.image, 0.0)};
}

void expect_shape(const Mat64& w, std::size_t rows, std::size_t cols, const char* name) {
  if (w.rows != rows || w.cols != cols || w.values.size() != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(name) + ": expected " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", got " + std::to_string(w.rows) + "x" +
                    std::to_string(w.cols));
  }
}

void expect_length(std::span<const double> v, std::size_t n, const char* name) {
  if (v.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, std::string(name) + ": expected length " +
                                               std::to_string(n) + ", got " +
                                               std::to_string(v.size()));
  }
}

void require_shared_space(const HeadDims& dims, Flavor flavor) {
  if (dims.text != dims.image) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(flavor_name(flavor)) +
                    " compares text and image vectors directly and needs H_T == H_I");
  }
}

const AttentionParams& select(const HeadParams& params, AttentionKind which) {
  return which == AttentionKind::kImplicitSimilarity ? params.attn_is : params.attn_em;
}

}  // namespace

std::string_view flavor_name(Flavor flavor) {
  switch (flavor) {
    case Flavor::kImageOnly: return "image_only";
    case Flavor::kTextOnly: return "text_only";
    case Flavor::kLateFusion: return "late_fusion";
    case Flavor::kIsOnly: return "is_only";
    case Flavor::kEmOnly: return "em_only";
    case Flavor::kArtemis: return "artemis";
  }
  return "unknown";
}

Flavor parse_flavor(std::string_view name) {
  for (Flavor f : kAllFlavors) {
    if (flavor_name(f) == name) return f;
  }
  throw Error(ErrorCode::kConfig, "unknown flavor '" + std::string(name) + "'");
}

HeadParams zero_params(const HeadDims& dims) {
  if (dims.text == 0 || dims.image == 0 || dims.hidden == 0) {
    throw Error(ErrorCode::kShapeMismatch, "head dims must be positive");
  }
  HeadParams p;
  p.dims = dims;
  p.attn_is = zero_attention(dims);
  p.attn_em = zero_attention(dims);
  p.proj = {Mat64(dims.text, dims.image), Vec64(dims.image, 0.0)};
  p.gamma = kInitialGamma;
  return p;
}

HeadParams init_params(const HeadDims& dims, std::uint64_t seed) {
  HeadParams p = zero_params(dims);
  std::mt19937_64 rng(seed);
  glorot_fill(p.attn_is.w1, rng);
  glorot_fill(p.attn_is.w2, rng);
  glorot_fill(p.attn_em.w1, rng);
  glorot_fill(p.attn_em.w2, rng);
  glorot_fill(p.proj.w, rng);
  return p;
}

void validate_params(const HeadParams& params) {
  const HeadDims& d = params.dims;
  for (const AttentionParams* a : {&params.attn_is, &params.attn_em}) {
    expect_shape(a->w1, d.text, d.hidden, "attention w1");
    expect_length(a->b1, d.hidden, "attention b1");
    expect_shape(a->w2, d.hidden, d.image, "attention w2");
    expect_length(a->b2, d.image, "attention b2");
  }
  expect_shape(params.proj.w, d.text, d.image, "projection w");
  expect_length(params.proj.b, d.image, "projection b");
  if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) {
    throw Error(ErrorCode::kSpecInvalid, "gamma must be positive and finite");
  }
  bool finite = true;
  for_each_block(params, [&](const Vec64& v) { finite = finite && all_finite(v); });
  if (!finite) throw Error(ErrorCode::kSpecInvalid, "non-finite parameter");
}

Vec64 attention(std::span<const double> m, AttentionKind which, const HeadParams& params) {
  expect_length(m, params.dims.text, "modifier");
  const AttentionParams& a = select(params, which);
  return softmax(mlp2(m, a.w1, a.b1, a.w2, a.b2));
}

Vec64 project_text(std::span<const double> m, const HeadParams& params) {
  expect_length(m, params.dims.text, "modifier");
  return affine(m, params.proj.w, params.proj.b);
}

double score_is(std::span<const double> r, std::span<const double> m,
                std::span<const double> t, const HeadParams& params) {
  expect_length(r, params.dims.image, "reference");
  expect_length(t, params.dims.image, "target");
  const Vec64 a = attention(m, AttentionKind::kImplicitSimilarity, params);
  return weighted_cosine(a, r, t);
}

double score_em(std::span<const double> m, std::span<const double> t, const HeadParams& params) {
  expect_length(t, params.dims.image, "target");
  const Vec64 a = attention(m, AttentionKind::kExplicitMatching, params);
  const Vec64 projected = project_text(m, params);
  return cosine(projected, hadamard(a, t));
}

double score(std::span<const double> r, std::span<const double> m, std::span<const double> t,
             const HeadParams& params, Flavor flavor) {
  switch (flavor) {
    case Flavor::kImageOnly:
      expect_length(r, params.dims.image, "reference");
      expect_length(t, params.dims.image, "target");
      return cosine(r, t);
    case Flavor::kTextOnly:
      require_shared_space(params.dims, flavor);
      expect_length(m, params.dims.text, "modifier");
      expect_length(t, params.dims.image, "target");
      return cosine(m, t);
    case Flavor::kLateFusion: {
      require_shared_space(params.dims, flavor);
      expect_length(r, params.dims.image, "reference");
      expect_length(m, params.dims.text, "modifier");
      expect_length(t, params.dims.image, "target");
      Vec64 fused(r.begin(), r.end());
      for (std::size_t i = 0; i < fused.size(); ++i) fused[i] += m[i];
      return cosine(fused, t);
    }
    case Flavor::kIsOnly: return score_is(r, m, t, params);
    case Flavor::kEmOnly: return score_em(m, t, params);
    case Flavor::kArtemis: {
      const double em = score_em(m, t, params);
      const double is = score_is(r, m, t, params);
      return em + is;
    }
  }
  throw Error(ErrorCode::kConfig, "unhandled flavor");
}

std::uint64_t head_param_count(const HeadDims& dims) {
  const std::uint64_t t = dims.text, i = dims.image, h = dims.hidden;
  const std::uint64_t attention = t * h + h + h * i + i;
  return 2 * attention + (t * i + i) + 1;
}

std::uint64_t head_param_count(const HeadParams& params) {
  std::uint64_t n = 0;
  for_each_block(params, [&](const Vec64& v) { n += v.size(); });
  return n + 1;
}

std::uint64_t head_mac_count(const HeadDims& dims) {
  const std::uint64_t t = dims.text, i = dims.image, h = dims.hidden;
  return 2 * (t * h + h * i) + t * i + 6 * i;
}

Vec64 flatten(const HeadParams& params) {
  Vec64 flat;
  flat.reserve(head_param_count(params));
  for_each_block(params, [&](const Vec64& v) { flat.insert(flat.end(), v.begin(), v.end()); });
  flat.push_back(params.gamma);
  return flat;
}

HeadParams unflatten(std::span<const double> flat, const HeadDims& dims) {
  HeadParams p = zero_params(dims);
  if (flat.size() != head_param_count(p)) {
    throw Error(ErrorCode::kShapeMismatch, "unflatten: expected " +
                                               std::to_string(head_param_count(p)) +
                                               " values, got " + std::to_string(flat.size()));
  }
  std::size_t at = 0;
  for_each_block(p, [&](Vec64& v) {
    std::copy(flat.begin() + at, flat.begin() + at + v.size(), v.begin());
    at += v.size();
  });
  p.gamma = flat[at];
  return p;
}

HeadVars bind_params(Tape& tape, const HeadParams& params) {
  auto bind_attention = [&](const AttentionParams& a) {
    return HeadVars::Attention{tape.parameter(a.w1.values, a.w1.rows, a.w1.cols),
                               tape.parameter(a.b1),
                               tape.parameter(a.w2.values, a.w2.rows, a.w2.cols),
                               tape.parameter(a.b2)};
  };
  HeadVars vars;
  vars.attn_is = bind_attention(params.attn_is);
  vars.attn_em = bind_attention(params.attn_em);
  vars.proj_w = tape.parameter(params.proj.w.values, params.proj.w.rows, params.proj.w.cols);
  vars.proj_b = tape.parameter(params.proj.b);
  vars.gamma = tape.parameter({params.gamma});
  return vars;
}

HeadParams collect_grads(Tape& tape, const HeadVars& vars, const HeadDims& dims) {
  HeadParams g = zero_params(dims);
  auto take = [&](const HeadVars::Attention& v, AttentionParams& a) {
    a.w1.values = tape.grad(v.w1);
    a.b1 = tape.grad(v.b1);
    a.w2.values = tape.grad(v.w2);
    a.b2 = tape.grad(v.b2);
  };
  take(vars.attn_is, g.attn_is);
  take(vars.attn_em, g.attn_em);
  g.proj.w.values = tape.grad(vars.proj_w);
  g.proj.b = tape.grad(vars.proj_b);
  g.gamma = tape.grad(vars.gamma)[0];
  return g;
}

TapeQuery tape_query(Tape& tape, const HeadVars& vars, Tape::Var r, Tape::Var m, Flavor flavor) {
  TapeQuery q;
  q.r = r;
  q.m = m;
  auto attend = [&](const HeadVars::Attention& a) {
    const Tape::Var hidden = tape.relu(tape.affine(m, a.w1, a.b1));
    return tape.softmax(tape.affine(hidden, a.w2, a.b2));
  };
  if (flavor == Flavor::kIsOnly || flavor == Flavor::kArtemis) q.a_is = attend(vars.attn_is);
  if (flavor == Flavor::kEmOnly || flavor == Flavor::kArtemis) {
    q.a_em = attend(vars.attn_em);
    q.projected = tape.affine(m, vars.proj_w, vars.proj_b);
  }
  if (flavor == Flavor::kLateFusion) q.fused = tape.add(r, m);
  return q;
}

Tape::Var tape_score(Tape& tape, const TapeQuery& q, Tape::Var t, Flavor flavor) {
  switch (flavor) {
    case Flavor::kImageOnly: return tape.cosine(q.r, t);
    case Flavor::kTextOnly: return tape.cosine(q.m, t);
    case Flavor::kLateFusion: return tape.cosine(q.fused, t);
    case Flavor::kIsOnly: return tape.weighted_cosine(q.a_is, q.r, t);
    case Flavor::kEmOnly: return tape.cosine(q.projected, tape.hadamard(q.a_em, t));
    case Flavor::kArtemis: {
      const Tape::Var em = tape.cosine(q.projected, tape.hadamard(q.a_em, t));
      const Tape::Var is = tape.weighted_cosine(q.a_is, q.r, t);
      return tape.add(em, is);
    }
  }
  throw Error(ErrorCode::kConfig, "unhandled flavor");
}

}  // namespace artemis
