/*
 * Copyright 2026 The dverec authors
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
#include <memory>
#include <optional>
#include <vector>

#include "dverec/tensor.hpp"

namespace dverec {

using NodeId = int32_t;

enum class Op {
  leaf,      // external tensor (usually a trainable parameter)
  constant,  // inline value, never differentiated
  matmul,
  add,   // same shape, or second operand a [1,N] row / scalar broadcast
  sub,   // same shape, or second operand a scalar
  mul,   // elementwise; either operand may be a scalar or a [M,1] column
  scale,
  concat,       // along the last axis
  gather_rows,  // rows of a rank-2 tensor by index list (repeats allowed)
  relu,
  abs,
  square,
  sqrt,
  log,
  clamp,
  sigmoid,
  tanh,
  sum,   // all entries -> scalar
  mean,  // all entries -> scalar
};

const char* op_name(Op op);

/// Reverse-mode autodiff tape over dense tensors.
///
/// The graph is define-by-run: each builder method runs the op forward
/// immediately, appends a record to the tape and returns the node id.
/// Appending order is therefore a topological order, and backward() is a
/// single reverse sweep. Ops are pure functions of their input values;
/// recompute() re-runs the whole tape and must reproduce every value bit
/// for bit.
///
/// In f32 precision mode every op output is rounded to the nearest float
/// after it is computed; gradients are kept in full double precision.
class Graph {
 public:
  explicit Graph(Precision precision = Precision::f64) : precision_(precision) {}

  Precision precision() const { return precision_; }

  /// Register an externally owned tensor (a model parameter). The tape
  /// holds a reference, not a copy; the tensor must stay alive and
  /// unchanged between forward and backward.
  NodeId leaf(std::shared_ptr<Tensor> t);

  /// Inline value that never receives a gradient.
  NodeId constant(Tensor t);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double alpha);
  NodeId concat(NodeId a, NodeId b);
  NodeId gather_rows(NodeId a, std::vector<int64_t> indices);
  NodeId gather_row(NodeId a, int64_t index);  // single row, shape [1,C]
  NodeId relu(NodeId a);
  NodeId abs(NodeId a);
  NodeId square(NodeId a);
  NodeId sqrt(NodeId a);
  NodeId log(NodeId a);
  NodeId clamp(NodeId a, double lo, double hi);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);

  const Tensor& value(NodeId id) const;
  int64_t node_count() const { return static_cast<int64_t>(nodes_.size()); }
  Op op_of(NodeId id) const;

  /// Reverse sweep from a scalar loss node. Populates a gradient for every
  /// node that (transitively) requires one; leaves that require a gradient
  /// but do not reach the loss get zeros. The tape itself is unchanged.
  void backward(NodeId loss);

  bool has_grad(NodeId id) const;
  const Tensor& grad(NodeId id) const;

  /// All leaf nodes bound to this tensor (a tensor may be bound more than
  /// once; its total gradient is the sum over those nodes).
  std::vector<NodeId> leaves_of(const Tensor* t) const;

  /// Re-run the forward pass over the recorded tape (tape replay).
  void recompute();

 private:
  struct Node {
    Op op;
    std::array<NodeId, 2> in{-1, -1};
    Tensor value;
    std::shared_ptr<Tensor> external;  // leaf storage
    bool requires_grad = false;
    double alpha = 0.0;  // scale factor / clamp lo
    double beta = 0.0;   // clamp hi
    std::vector<int64_t> indices;
  };

  const Tensor& val(NodeId id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    return n.op == Op::leaf ? *n.external : n.value;
  }
  NodeId push(Node n);
  void check_id(NodeId id) const;
  Tensor eval(const Node& n) const;

  Precision precision_;
  std::vector<Node> nodes_;
  std::vector<std::optional<Tensor>> grads_;
};

}  // namespace dverec
