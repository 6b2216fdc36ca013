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

#include "dverec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dverec {

namespace {

[[noreturn]] void shape_fail(Op op, const Tensor& a, const Tensor& b) {
  std::ostringstream os;
  os << op_name(op) << ": incompatible shapes " << a.shape_str() << " and " << b.shape_str();
  throw std::invalid_argument(os.str());
}

[[noreturn]] void shape_fail(Op op, const Tensor& a, const char* what) {
  std::ostringstream os;
  os << op_name(op) << ": " << what << " (got " << a.shape_str() << ")";
  throw std::invalid_argument(os.str());
}

bool is_scalar(const Tensor& t) { return t.size() == 1; }

// C[M,N] = A[M,K] * B[K,N]. Accumulation over k is strictly ascending for
// every output entry; tests that replicate results bit for bit rely on this.
void matmul_kernel(const double* a, const double* b, double* c, int64_t m, int64_t k, int64_t n) {
  std::fill(c, c + m * n, 0.0);
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (int64_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::leaf: return "leaf";
    case Op::constant: return "constant";
    case Op::matmul: return "matmul";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::scale: return "scale";
    case Op::concat: return "concat";
    case Op::gather_rows: return "gather_rows";
    case Op::relu: return "relu";
    case Op::abs: return "abs";
    case Op::square: return "square";
    case Op::sqrt: return "sqrt";
    case Op::log: return "log";
    case Op::clamp: return "clamp";
    case Op::sigmoid: return "sigmoid";
    case Op::tanh: return "tanh";
    case Op::sum: return "sum";
    case Op::mean: return "mean";
  }
  return "?";
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
  os << "]";
  return os.str();
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Graph::check_id(NodeId id) const {
  if (id < 0 || id >= node_count()) throw std::out_of_range("Graph: bad node id");
}

NodeId Graph::push(Node n) {
  if (n.op != Op::leaf) n.value.round_to(precision_);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::leaf(std::shared_ptr<Tensor> t) {
  if (!t) throw std::invalid_argument("leaf: null tensor");
  Node n;
  n.op = Op::leaf;
  n.external = std::move(t);
  n.requires_grad = n.external->requires_grad();
  return push(std::move(n));
}

NodeId Graph::constant(Tensor t) {
  Node n;
  n.op = Op::constant;
  n.value = std::move(t);
  n.value.round_to(precision_);
  return push(std::move(n));
}

// Forward evaluation of a non-source node from its input values.
Tensor Graph::eval(const Node& n) const {
  auto unary_in = [&]() -> const Tensor& { return val(n.in[0]); };
  switch (n.op) {
    case Op::leaf:
    case Op::constant:
      throw std::logic_error("eval: source node");

    case Op::matmul: {
      const Tensor& a = val(n.in[0]);
      const Tensor& b = val(n.in[1]);
      if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) shape_fail(Op::matmul, a, b);
      Tensor out({a.shape()[0], b.shape()[1]});
      matmul_kernel(a.data().data(), b.data().data(), out.data().data(), a.shape()[0], a.shape()[1],
                    b.shape()[1]);
      return out;
    }

    case Op::add: {
      const Tensor& a = val(n.in[0]);
      const Tensor& b = val(n.in[1]);
      Tensor out = a;
      if (a.same_shape(b)) {
        for (int64_t i = 0; i < a.size(); ++i) out.at(i) += b.at(i);
      } else if (is_scalar(b)) {
        for (double& v : out.data()) v += b.at(0);
      } else if (a.rank() == 2 && b.rank() == 2 && b.shape()[0] == 1 && b.shape()[1] == a.shape()[1]) {
        for (int64_t r = 0; r < a.rows(); ++r)
          for (int64_t c = 0; c < a.cols(); ++c) out(r, c) += b(0, c);
      } else {
        shape_fail(Op::add, a, b);
      }
      return out;
    }

    case Op::sub: {
      const Tensor& a = val(n.in[0]);
      const Tensor& b = val(n.in[1]);
      Tensor out = a;
      if (a.same_shape(b)) {
        for (int64_t i = 0; i < a.size(); ++i) out.at(i) -= b.at(i);
      } else if (is_scalar(b)) {
        for (double& v : out.data()) v -= b.at(0);
      } else {
        shape_fail(Op::sub, a, b);
      }
      return out;
    }

    case Op::mul: {
      const Tensor& a = val(n.in[0]);
      const Tensor& b = val(n.in[1]);
      if (a.same_shape(b)) {
        Tensor out = a;
        for (int64_t i = 0; i < a.size(); ++i) out.at(i) *= b.at(i);
        return out;
      }
      if (is_scalar(b)) {
        Tensor out = a;
        for (double& v : out.data()) v *= b.at(0);
        return out;
      }
      if (is_scalar(a)) {
        Tensor out = b;
        for (double& v : out.data()) v *= a.at(0);
        return out;
      }
      // column broadcast: [M,1] against [M,N] (either side)
      const Tensor* col = nullptr;
      const Tensor* full = nullptr;
      if (a.rank() == 2 && b.rank() == 2 && a.shape()[1] == 1 && a.shape()[0] == b.shape()[0])
        col = &a, full = &b;
      else if (a.rank() == 2 && b.rank() == 2 && b.shape()[1] == 1 && b.shape()[0] == a.shape()[0])
        col = &b, full = &a;
      else
        shape_fail(Op::mul, a, b);
      Tensor out = *full;
      for (int64_t r = 0; r < full->rows(); ++r)
        for (int64_t c = 0; c < full->cols(); ++c) out(r, c) *= (*col)(r, 0);
      return out;
    }

    case Op::scale: {
      Tensor out = unary_in();
      for (double& v : out.data()) v *= n.alpha;
      return out;
    }

    case Op::concat: {
      const Tensor& a = val(n.in[0]);
      const Tensor& b = val(n.in[1]);
      if (a.rank() == 1 && b.rank() == 1) {
        std::vector<double> d(a.data());
        d.insert(d.end(), b.data().begin(), b.data().end());
        return Tensor::vec(std::move(d));
      }
      if (a.rank() == 2 && b.rank() == 2 && a.shape()[0] == b.shape()[0]) {
        Tensor out({a.shape()[0], a.shape()[1] + b.shape()[1]});
        for (int64_t r = 0; r < a.rows(); ++r) {
          for (int64_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
          for (int64_t c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
        }
        return out;
      }
      shape_fail(Op::concat, a, b);
    }

    case Op::gather_rows: {
      const Tensor& a = unary_in();
      if (a.rank() != 2) shape_fail(Op::gather_rows, a, "rank-2 input required");
      Tensor out({static_cast<int64_t>(n.indices.size()), a.shape()[1]});
      for (size_t i = 0; i < n.indices.size(); ++i) {
        int64_t r = n.indices[i];
        if (r < 0 || r >= a.shape()[0])
          throw std::out_of_range("gather_rows: index " + std::to_string(r) + " out of range [0," +
                                  std::to_string(a.shape()[0]) + ")");
        for (int64_t c = 0; c < a.cols(); ++c) out(static_cast<int64_t>(i), c) = a(r, c);
      }
      return out;
    }

    case Op::relu: {
      Tensor out = unary_in();
      for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
      return out;
    }
    case Op::abs: {
      Tensor out = unary_in();
      for (double& v : out.data()) v = std::fabs(v);
      return out;
    }
    case Op::square: {
      Tensor out = unary_in();
      for (double& v : out.data()) v = v * v;
      return out;
    }
    case Op::sqrt: {
      Tensor out = unary_in();
      for (double& v : out.data()) {
        if (v < 0.0) throw NumericError("sqrt: negative input");
        v = std::sqrt(v);
      }
      return out;
    }
    case Op::log: {
      Tensor out = unary_in();
      for (double& v : out.data()) {
        if (v <= 0.0) throw NumericError("log: non-positive input");
        v = std::log(v);
      }
      return out;
    }
    case Op::clamp: {
      Tensor out = unary_in();
      for (double& v : out.data()) v = std::min(std::max(v, n.alpha), n.beta);
      return out;
    }
    case Op::sigmoid: {
      Tensor out = unary_in();
      for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
      return out;
    }
    case Op::tanh: {
      Tensor out = unary_in();
      for (double& v : out.data()) v = std::tanh(v);
      return out;
    }

    case Op::sum: {
      const Tensor& a = unary_in();
      double s = 0.0;
      for (double v : a.data()) s += v;
      return Tensor::scalar(s);
    }
    case Op::mean: {
      const Tensor& a = unary_in();
      double s = 0.0;
      for (double v : a.data()) s += v;
      return Tensor::scalar(s / static_cast<double>(a.size()));
    }
  }
  throw std::logic_error("eval: unknown op");
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::matmul;
  n.in = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = eval(n);
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::add;
  n.in = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = eval(n);
  return push(std::move(n));
}

NodeId Graph::sub(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::sub;
  n.in = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = eval(n);
  return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::mul;
  n.in = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = eval(n);
  return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double alpha) {
  check_id(a);
  Node n;
  n.op = Op::scale;
  n.in = {a, -1};
  n.alpha = alpha;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = eval(n);
  return push(std::move(n));
}

NodeId Graph::concat(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::concat;
  n.in = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = eval(n);
  return push(std::move(n));
}

NodeId Graph::gather_rows(NodeId a, std::vector<int64_t> indices) {
  check_id(a);
  Node n;
  n.op = Op::gather_rows;
  n.in = {a, -1};
  n.indices = std::move(indices);
  n.requires_grad = nodes_[a].requires_grad;
  n.value = eval(n);
  return push(std::move(n));
}

NodeId Graph::gather_row(NodeId a, int64_t index) { return gather_rows(a, {index}); }

#define DVEREC_UNARY(NAME, OPK)                    \
  NodeId Graph::NAME(NodeId a) {                   \
    check_id(a);                                   \
    Node n;                                        \
    n.op = OPK;                                    \
    n.in = {a, -1};                                \
    n.requires_grad = nodes_[a].requires_grad;     \
    n.value = eval(n);                             \
    return push(std::move(n));                     \
  }

DVEREC_UNARY(relu, Op::relu)
DVEREC_UNARY(abs, Op::abs)
DVEREC_UNARY(square, Op::square)
DVEREC_UNARY(sqrt, Op::sqrt)
DVEREC_UNARY(log, Op::log)
DVEREC_UNARY(sigmoid, Op::sigmoid)
DVEREC_UNARY(tanh, Op::tanh)
DVEREC_UNARY(sum, Op::sum)
DVEREC_UNARY(mean, Op::mean)
#undef DVEREC_UNARY

NodeId Graph::clamp(NodeId a, double lo, double hi) {
  check_id(a);
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
  Node n;
  n.op = Op::clamp;
  n.in = {a, -1};
  n.alpha = lo;
  n.beta = hi;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = eval(n);
  return push(std::move(n));
}

const Tensor& Graph::value(NodeId id) const {
  check_id(id);
  return val(id);
}

Op Graph::op_of(NodeId id) const {
  check_id(id);
  return nodes_[static_cast<size_t>(id)].op;
}

bool Graph::has_grad(NodeId id) const {
  check_id(id);
  return static_cast<size_t>(id) < grads_.size() && grads_[static_cast<size_t>(id)].has_value();
}

const Tensor& Graph::grad(NodeId id) const {
  if (!has_grad(id)) throw StateError("grad: node has no gradient (run backward first)");
  return *grads_[static_cast<size_t>(id)];
}

std::vector<NodeId> Graph::leaves_of(const Tensor* t) const {
  std::vector<NodeId> out;
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].op == Op::leaf && nodes_[i].external.get() == t)
      out.push_back(static_cast<NodeId>(i));
  return out;
}

void Graph::recompute() {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.op == Op::leaf || n.op == Op::constant) continue;
    n.value = eval(n);
    n.value.round_to(precision_);
  }
}

void Graph::backward(NodeId loss) {
  check_id(loss);
  const Tensor& lv = val(loss);
  if (lv.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " + lv.shape_str());

  grads_.assign(nodes_.size(), std::nullopt);
  {
    Tensor seed = lv;  // keep loss shape, fill with 1
    for (double& v : seed.data()) v = 1.0;
    grads_[static_cast<size_t>(loss)] = std::move(seed);
  }

  auto accum = [&](NodeId id, const Tensor& contribution) {
    if (!nodes_[static_cast<size_t>(id)].requires_grad) return;
    auto& slot = grads_[static_cast<size_t>(id)];
    if (!slot) {
      slot = contribution;
    } else {
      for (int64_t i = 0; i < contribution.size(); ++i) slot->at(i) += contribution.at(i);
    }
  };

  for (NodeId id = loss; id >= 0; --id) {
    const Node& n = nodes_[static_cast<size_t>(id)];
    if (!grads_[static_cast<size_t>(id)] || !n.requires_grad) continue;
    const Tensor& g = *grads_[static_cast<size_t>(id)];

    switch (n.op) {
      case Op::leaf:
      case Op::constant:
        break;

      case Op::matmul: {
        const Tensor& a = val(n.in[0]);
        const Tensor& b = val(n.in[1]);
        int64_t m = a.shape()[0], k = a.shape()[1], p = b.shape()[1];
        if (nodes_[n.in[0]].requires_grad) {
          // dA[i,q] = sum_j g[i,j] * B[q,j]
          Tensor da({m, k});
          for (int64_t i = 0; i < m; ++i)
            for (int64_t q = 0; q < k; ++q) {
              double s = 0.0;
              for (int64_t j = 0; j < p; ++j) s += g(i, j) * b(q, j);
              da(i, q) = s;
            }
          accum(n.in[0], da);
        }
        if (nodes_[n.in[1]].requires_grad) {
          // dB[q,j] = sum_i A[i,q] * g[i,j]; i ascending for every entry
          Tensor db({k, p});
          for (int64_t i = 0; i < m; ++i)
            for (int64_t q = 0; q < k; ++q) {
              const double av = a(i, q);
              for (int64_t j = 0; j < p; ++j) db(q, j) += av * g(i, j);
            }
          accum(n.in[1], db);
        }
        break;
      }

      case Op::add: {
        const Tensor& a = val(n.in[0]);
        const Tensor& b = val(n.in[1]);
        accum(n.in[0], g);
        if (nodes_[n.in[1]].requires_grad) {
          if (a.same_shape(b)) {
            accum(n.in[1], g);
          } else if (is_scalar(b)) {
            double s = 0.0;
            for (double v : g.data()) s += v;
            accum(n.in[1], Tensor(b.shape(), std::vector<double>{s}));
          } else {  // row broadcast
            Tensor db(b.shape());
            for (int64_t r = 0; r < g.rows(); ++r)
              for (int64_t c = 0; c < g.cols(); ++c) db(0, c) += g(r, c);
            accum(n.in[1], db);
          }
        }
        break;
      }

      case Op::sub: {
        const Tensor& b = val(n.in[1]);
        accum(n.in[0], g);
        if (nodes_[n.in[1]].requires_grad) {
          if (val(n.in[0]).same_shape(b)) {
            Tensor db = g;
            for (double& v : db.data()) v = -v;
            accum(n.in[1], db);
          } else {
            double s = 0.0;
            for (double v : g.data()) s += v;
            accum(n.in[1], Tensor(b.shape(), std::vector<double>{-s}));
          }
        }
        break;
      }

      case Op::mul: {
        const Tensor& a = val(n.in[0]);
        const Tensor& b = val(n.in[1]);
        auto side_grad = [&](const Tensor& self, const Tensor& other) -> Tensor {
          // gradient w.r.t. `self` where out = self (*) other under the
          // same broadcast rules as forward
          if (a.same_shape(b)) {
            Tensor d = g;
            for (int64_t i = 0; i < d.size(); ++i) d.at(i) *= other.at(i);
            return d;
          }
          if (is_scalar(self)) {
            double s = 0.0;
            for (int64_t i = 0; i < g.size(); ++i) s += g.at(i) * other.at(i);
            return Tensor(self.shape(), std::vector<double>{s});
          }
          if (is_scalar(other)) {
            Tensor d = g;
            for (double& v : d.data()) v *= other.at(0);
            return d;
          }
          if (self.cols() == 1) {  // self is the [M,1] column
            Tensor d(self.shape());
            for (int64_t r = 0; r < g.rows(); ++r) {
              double s = 0.0;
              for (int64_t c = 0; c < g.cols(); ++c) s += g(r, c) * other(r, c);
              d(r, 0) = s;
            }
            return d;
          }
          // self is the full matrix, other the column
          Tensor d = g;
          for (int64_t r = 0; r < d.rows(); ++r)
            for (int64_t c = 0; c < d.cols(); ++c) d(r, c) *= other(r, 0);
          return d;
        };
        if (nodes_[n.in[0]].requires_grad) accum(n.in[0], side_grad(a, b));
        if (nodes_[n.in[1]].requires_grad) accum(n.in[1], side_grad(b, a));
        break;
      }

      case Op::scale: {
        Tensor d = g;
        for (double& v : d.data()) v *= n.alpha;
        accum(n.in[0], d);
        break;
      }

      case Op::concat: {
        const Tensor& a = val(n.in[0]);
        const Tensor& b = val(n.in[1]);
        if (a.rank() == 1) {
          if (nodes_[n.in[0]].requires_grad) {
            Tensor da(a.shape());
            for (int64_t i = 0; i < a.size(); ++i) da.at(i) = g.at(i);
            accum(n.in[0], da);
          }
          if (nodes_[n.in[1]].requires_grad) {
            Tensor db(b.shape());
            for (int64_t i = 0; i < b.size(); ++i) db.at(i) = g.at(a.size() + i);
            accum(n.in[1], db);
          }
        } else {
          if (nodes_[n.in[0]].requires_grad) {
            Tensor da(a.shape());
            for (int64_t r = 0; r < a.rows(); ++r)
              for (int64_t c = 0; c < a.cols(); ++c) da(r, c) = g(r, c);
            accum(n.in[0], da);
          }
          if (nodes_[n.in[1]].requires_grad) {
            Tensor db(b.shape());
            for (int64_t r = 0; r < b.rows(); ++r)
              for (int64_t c = 0; c < b.cols(); ++c) db(r, c) = g(r, a.cols() + c);
            accum(n.in[1], db);
          }
        }
        break;
      }

      case Op::gather_rows: {
        const Tensor& a = val(n.in[0]);
        Tensor da(a.shape());
        for (size_t i = 0; i < n.indices.size(); ++i) {
          int64_t r = n.indices[i];
          for (int64_t c = 0; c < a.cols(); ++c) da(r, c) += g(static_cast<int64_t>(i), c);
        }
        accum(n.in[0], da);
        break;
      }

      case Op::relu: {
        const Tensor& x = val(n.in[0]);
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i)
          if (x.at(i) <= 0.0) d.at(i) = 0.0;
        accum(n.in[0], d);
        break;
      }
      case Op::abs: {
        const Tensor& x = val(n.in[0]);
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i)
          d.at(i) *= (x.at(i) > 0.0 ? 1.0 : (x.at(i) < 0.0 ? -1.0 : 0.0));
        accum(n.in[0], d);
        break;
      }
      case Op::square: {
        const Tensor& x = val(n.in[0]);
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i) d.at(i) *= 2.0 * x.at(i);
        accum(n.in[0], d);
        break;
      }
      case Op::sqrt: {
        const Tensor& y = n.value;
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i) d.at(i) *= 0.5 / y.at(i);
        accum(n.in[0], d);
        break;
      }
      case Op::log: {
        const Tensor& x = val(n.in[0]);
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i) d.at(i) /= x.at(i);
        accum(n.in[0], d);
        break;
      }
      case Op::clamp: {
        const Tensor& x = val(n.in[0]);
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i)
          if (x.at(i) < n.alpha || x.at(i) > n.beta) d.at(i) = 0.0;
        accum(n.in[0], d);
        break;
      }
      case Op::sigmoid: {
        const Tensor& y = n.value;
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i) d.at(i) *= y.at(i) * (1.0 - y.at(i));
        accum(n.in[0], d);
        break;
      }
      case Op::tanh: {
        const Tensor& y = n.value;
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i) d.at(i) *= 1.0 - y.at(i) * y.at(i);
        accum(n.in[0], d);
        break;
      }

      case Op::sum: {
        const Tensor& x = val(n.in[0]);
        Tensor d(x.shape(), g.at(0));
        accum(n.in[0], d);
        break;
      }
      case Op::mean: {
        const Tensor& x = val(n.in[0]);
        Tensor d(x.shape(), g.at(0) / static_cast<double>(x.size()));
        accum(n.in[0], d);
        break;
      }
    }
  }

  // every requires-grad leaf gets a gradient, zero if unreachable
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.op == Op::leaf && n.requires_grad && !grads_[i]) grads_[i] = Tensor(n.external->shape());
  }
}

}  // namespace dverec
