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
#include <span>
#include <vector>

#include "artemis/numerics.hpp"

namespace artemis {

// Reverse-mode differentiation over the handful of vector primitives the
// scoring head needs. Nodes are appended in evaluation order, so a reverse
// sweep over the node list is a valid topological traversal that visits each
// node once. A tape belongs to one thread for the duration of a step.
class Tape {
 public:
  struct Var {
    std::size_t id = 0;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. `rows`/`cols` are only meaningful for matrices fed to affine().
  Var constant(Vec64 value);
  Var parameter(Vec64 value, std::size_t rows = 0, std::size_t cols = 0);

  Var affine(Var x, Var w, Var b);  // x^T W + b
  Var relu(Var x);
  Var softmax(Var x);
  Var hadamard(Var x, Var y);
  Var add(Var x, Var y);
  Var scale(Var x, Var s);  // x * s, s scalar
  Var cosine(Var x, Var y);
  Var weighted_cosine(Var a, Var x, Var y);
  Var stack(std::span<const Var> scalars);
  Var mean(std::span<const Var> scalars);
  // -log softmax(logits)[target]
  Var cross_entropy(Var logits, std::size_t target);

  void backward(Var root);

  const Vec64& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value.at(0); }
  // Zero-filled for nodes that do not depend on any parameter.
  const Vec64& grad(Var v);
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Vec64 value;
    Vec64 grad;
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool requires_grad = false;
    std::function<void()> backward;
  };

  Var push(Vec64 value, bool requires_grad, std::function<void()> backward);
  Vec64& grad_buffer(std::size_t id);

  std::vector<Node> nodes_;
};

}  // namespace artemis
