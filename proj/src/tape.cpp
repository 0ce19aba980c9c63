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

#include "artemis/tape.hpp"

#include <cmath>
#include <string>

#include "artemis/error.hpp"

namespace artemis {

namespace {

void check_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw Error(ErrorCode::kShapeMismatch, std::string("tape ") + op + ": lengths " +
                                               std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

Tape::Var Tape::push(Vec64 value, bool requires_grad, std::function<void()> backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Vec64& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

const Vec64& Tape::grad(Var v) { return grad_buffer(v.id); }

Tape::Var Tape::constant(Vec64 value) { return push(std::move(value), false, {}); }

Tape::Var Tape::parameter(Vec64 value, std::size_t rows, std::size_t cols) {
  Var v = push(std::move(value), true, [] {});
  nodes_[v.id].rows = rows;
  nodes_[v.id].cols = cols;
  return v;
}

Tape::Var Tape::affine(Var x, Var w, Var b) {
  const Node& wn = nodes_[w.id];
  const std::size_t rows = wn.rows, cols = wn.cols;
  if (rows * cols != wn.value.size()) {
    throw Error(ErrorCode::kShapeMismatch, "tape affine: weight has no matrix shape");
  }
  check_length(nodes_[x.id].value.size(), rows, "affine(input)");
  check_length(nodes_[b.id].value.size(), cols, "affine(bias)");
  Vec64 out = nodes_[b.id].value;
  {
    const Vec64& xv = nodes_[x.id].value;
    const double* wv = wn.value.data();
    for (std::size_t i = 0; i < rows; ++i) {
      const double xi = xv[i];
      const double* wr = wv + i * cols;
      for (std::size_t j = 0; j < cols; ++j) out[j] += xi * wr[j];
    }
  }
  const bool rg = requires_grad(x) || requires_grad(w) || requires_grad(b);
  const std::size_t self = nodes_.size();
  return push(std::move(out), rg, [this, self, x, w, b, rows, cols] {
    const Vec64& g = nodes_[self].grad;
    if (requires_grad(x)) {
      Vec64& gx = grad_buffer(x.id);
      const double* wv = nodes_[w.id].value.data();
      for (std::size_t i = 0; i < rows; ++i) {
        const double* wr = wv + i * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * g[j];
        gx[i] += acc;
      }
    }
    if (requires_grad(w)) {
      Vec64& gw = grad_buffer(w.id);
      const Vec64& xv = nodes_[x.id].value;
      for (std::size_t i = 0; i < rows; ++i) {
        const double xi = xv[i];
        if (xi == 0.0) continue;
        double* gr = gw.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) gr[j] += xi * g[j];
      }
    }
    if (requires_grad(b)) {
      Vec64& gb = grad_buffer(b.id);
      for (std::size_t j = 0; j < cols; ++j) gb[j] += g[j];
    }
  });
}

Tape::Var Tape::relu(Var x) {
  Vec64 out = artemis::relu(nodes_[x.id].value);
  const std::size_t self = nodes_.size();
  return push(std::move(out), requires_grad(x), [this, self, x] {
    const Vec64& g = nodes_[self].grad;
    const Vec64& xv = nodes_[x.id].value;
    Vec64& gx = grad_buffer(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Tape::Var Tape::softmax(Var x) {
  Vec64 out = artemis::softmax(nodes_[x.id].value);
  const std::size_t self = nodes_.size();
  return push(std::move(out), requires_grad(x), [this, self, x] {
    const Vec64& g = nodes_[self].grad;
    const Vec64& y = nodes_[self].value;
    const double gy = artemis::dot(g, y);
    Vec64& gx = grad_buffer(x.id);
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (g[i] - gy);
  });
}

Tape::Var Tape::hadamard(Var x, Var y) {
  Vec64 out = artemis::hadamard(nodes_[x.id].value, nodes_[y.id].value);
  const std::size_t self = nodes_.size();
  return push(std::move(out), requires_grad(x) || requires_grad(y), [this, self, x, y] {
    const Vec64& g = nodes_[self].grad;
    if (requires_grad(x)) {
      Vec64& gx = grad_buffer(x.id);
      const Vec64& yv = nodes_[y.id].value;
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i];
    }
    if (requires_grad(y)) {
      Vec64& gy = grad_buffer(y.id);
      const Vec64& xv = nodes_[x.id].value;
      for (std::size_t i = 0; i < g.size(); ++i) gy[i] += g[i] * xv[i];
    }
  });
}

Tape::Var Tape::add(Var x, Var y) {
  const Vec64& xv = nodes_[x.id].value;
  const Vec64& yv = nodes_[y.id].value;
  check_length(xv.size(), yv.size(), "add");
  Vec64 out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + yv[i];
  const std::size_t self = nodes_.size();
  return push(std::move(out), requires_grad(x) || requires_grad(y), [this, self, x, y] {
    const Vec64& g = nodes_[self].grad;
    for (Var in : {x, y}) {
      if (!requires_grad(in)) continue;
      Vec64& gi = grad_buffer(in.id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Tape::Var Tape::scale(Var x, Var s) {
  check_length(nodes_[s.id].value.size(), 1, "scale(factor)");
  const double factor = nodes_[s.id].value[0];
  Vec64 out = nodes_[x.id].value;
  for (double& v : out) v *= factor;
  const std::size_t self = nodes_.size();
  return push(std::move(out), requires_grad(x) || requires_grad(s), [this, self, x, s] {
    const Vec64& g = nodes_[self].grad;
    if (requires_grad(x)) {
      const double factor = nodes_[s.id].value[0];
      Vec64& gx = grad_buffer(x.id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
    }
    if (requires_grad(s)) grad_buffer(s.id)[0] += artemis::dot(g, nodes_[x.id].value);
  });
}

Tape::Var Tape::cosine(Var x, Var y) {
  const Vec64& xv = nodes_[x.id].value;
  const Vec64& yv = nodes_[y.id].value;
  check_length(xv.size(), yv.size(), "cosine");
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    xy += xv[i] * yv[i];
    xx += xv[i] * xv[i];
    yy += yv[i] * yv[i];
  }
  const double nx = std::sqrt(xx), ny = std::sqrt(yy);
  if (!(nx > kNormEpsilon) || !(ny > kNormEpsilon)) {
    throw Error(ErrorCode::kNearZeroNorm, "tape cosine: zero-norm operand");
  }
  const double s = xy / (nx * ny);
  const std::size_t self = nodes_.size();
  return push({s}, requires_grad(x) || requires_grad(y), [this, self, x, y, s, nx, ny] {
    const double g = nodes_[self].grad[0];
    const Vec64& xv = nodes_[x.id].value;
    const Vec64& yv = nodes_[y.id].value;
    const double inv = 1.0 / (nx * ny);
    if (requires_grad(x)) {
      Vec64& gx = grad_buffer(x.id);
      const double sx = s / (nx * nx);
      for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += g * (yv[i] * inv - sx * xv[i]);
    }
    if (requires_grad(y)) {
      Vec64& gy = grad_buffer(y.id);
      const double sy = s / (ny * ny);
      for (std::size_t i = 0; i < yv.size(); ++i) gy[i] += g * (xv[i] * inv - sy * yv[i]);
    }
  });
}

Tape::Var Tape::weighted_cosine(Var a, Var x, Var y) {
  const Vec64& av = nodes_[a.id].value;
  const Vec64& xv = nodes_[x.id].value;
  const Vec64& yv = nodes_[y.id].value;
  check_length(av.size(), xv.size(), "weighted_cosine");
  check_length(av.size(), yv.size(), "weighted_cosine");
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double ax = av[i] * xv[i];
    const double ay = av[i] * yv[i];
    xy += ax * ay;
    xx += ax * ax;
    yy += ay * ay;
  }
  const double nx = std::sqrt(xx), ny = std::sqrt(yy);
  if (!(nx > kNormEpsilon) || !(ny > kNormEpsilon)) {
    throw Error(ErrorCode::kNearZeroNorm, "tape weighted_cosine: zero-norm reweighted operand");
  }
  const double s = xy / (nx * ny);
  const bool rg = requires_grad(a) || requires_grad(x) || requires_grad(y);
  const std::size_t self = nodes_.size();
  return push({s}, rg, [this, self, a, x, y, s, nx, ny] {
    const double g = nodes_[self].grad[0];
    const Vec64& av = nodes_[a.id].value;
    const Vec64& xv = nodes_[x.id].value;
    const Vec64& yv = nodes_[y.id].value;
    const double inv = 1.0 / (nx * ny);
    const double sx = s / (nx * nx);
    const double sy = s / (ny * ny);
    double* ga = requires_grad(a) ? grad_buffer(a.id).data() : nullptr;
    double* gx = requires_grad(x) ? grad_buffer(x.id).data() : nullptr;
    double* gy = requires_grad(y) ? grad_buffer(y.id).data() : nullptr;
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double u = av[i] * xv[i];
      const double v = av[i] * yv[i];
      // d s / d u_i and d s / d v_i
      const double du = g * (v * inv - sx * u);
      const double dv = g * (u * inv - sy * v);
      if (ga) ga[i] += du * xv[i] + dv * yv[i];
      if (gx) gx[i] += du * av[i];
      if (gy) gy[i] += dv * av[i];
    }
  });
}

Tape::Var Tape::stack(std::span<const Var> scalars) {
  Vec64 out(scalars.size());
  bool rg = false;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    check_length(nodes_[scalars[i].id].value.size(), 1, "stack");
    out[i] = nodes_[scalars[i].id].value[0];
    rg = rg || requires_grad(scalars[i]);
  }
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  const std::size_t self = nodes_.size();
  return push(std::move(out), rg, [this, self, inputs = std::move(inputs)] {
    const Vec64& g = nodes_[self].grad;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (requires_grad(inputs[i])) grad_buffer(inputs[i].id)[0] += g[i];
    }
  });
}

Tape::Var Tape::mean(std::span<const Var> scalars) {
  if (scalars.empty()) throw Error(ErrorCode::kEmptyInput, "tape mean: no inputs");
  double total = 0.0;
  bool rg = false;
  for (Var v : scalars) {
    check_length(nodes_[v.id].value.size(), 1, "mean");
    total += nodes_[v.id].value[0];
    rg = rg || requires_grad(v);
  }
  const double n = static_cast<double>(scalars.size());
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  const std::size_t self = nodes_.size();
  return push({total / n}, rg, [this, self, n, inputs = std::move(inputs)] {
    const double g = nodes_[self].grad[0] / n;
    for (Var v : inputs) {
      if (requires_grad(v)) grad_buffer(v.id)[0] += g;
    }
  });
}

Tape::Var Tape::cross_entropy(Var logits, std::size_t target) {
  const Vec64& z = nodes_[logits.id].value;
  if (target >= z.size()) {
    throw Error(ErrorCode::kShapeMismatch, "tape cross_entropy: target out of range");
  }
  Vec64 p = artemis::softmax(z);
  double top = z[0];
  for (double v : z) top = v > top ? v : top;
  double total = 0.0;
  for (double v : z) total += std::exp(v - top);
  const double loss = top + std::log(total) - z[target];
  const std::size_t self = nodes_.size();
  return push({loss}, requires_grad(logits),
              [this, self, logits, target, p = std::move(p)] {
                const double g = nodes_[self].grad[0];
                Vec64& gz = grad_buffer(logits.id);
                for (std::size_t j = 0; j < p.size(); ++j) {
                  gz[j] += g * (p[j] - (j == target ? 1.0 : 0.0));
                }
              });
}

void Tape::backward(Var root) {
  if (!requires_grad(root)) return;
  check_length(nodes_[root.id].value.size(), 1, "backward(root)");
  for (Node& n : nodes_) n.grad.clear();
  grad_buffer(root.id)[0] = 1.0;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward();
  }
}

}  // namespace artemis
