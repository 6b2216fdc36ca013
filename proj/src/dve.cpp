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

#include "dverec/dve.hpp"

#include <cmath>

#include "dverec/init.hpp"

namespace dverec {

void EmbeddingConfig::validate() const {
  if (n_nodes < 1) throw std::invalid_argument("EmbeddingConfig: n_nodes must be >= 1");
  if (dim < 1 || variance_hidden_dim < 1 || head_hidden_dim < 1 || lstm_hidden_dim < 1)
    throw std::invalid_argument("EmbeddingConfig: all dimensions must be >= 1");
}

DveSideParams DveSideParams::create(const EmbeddingConfig& cfg, VarianceMode mode,
                                    std::mt19937_64& rng, Precision precision) {
  cfg.validate();
  DveSideParams p;
  p.cfg = cfg;
  p.mode = mode;

  // draw order is fixed: mean, var_in, head, then lstm gates (i, f, o, c)
  p.mean = gaussian_param({cfg.n_nodes, cfg.dim}, 0.01, rng, precision);
  p.var_in = gaussian_param({cfg.n_nodes, cfg.variance_hidden_dim}, 0.01, rng, precision);

  const int64_t head_in = mode == VarianceMode::lstm ? cfg.lstm_hidden_dim : cfg.variance_hidden_dim;
  p.head_w1 = fan_in_uniform_param(head_in, cfg.head_hidden_dim, rng, precision);
  p.head_b1 = zeros_param({1, cfg.head_hidden_dim});
  p.head_w2 = fan_in_uniform_param(cfg.head_hidden_dim, 1, rng, precision);
  p.head_b2 = zeros_param({1, 1});

  if (mode == VarianceMode::lstm) {
    auto make_gate = [&]() {
      Gate g;
      g.wx = fan_in_uniform_param(cfg.variance_hidden_dim, cfg.lstm_hidden_dim, rng, precision);
      g.wh = fan_in_uniform_param(cfg.lstm_hidden_dim, cfg.lstm_hidden_dim, rng, precision);
      g.b = zeros_param({1, cfg.lstm_hidden_dim});
      return g;
    };
    p.input_gate = make_gate();
    p.forget_gate = make_gate();
    p.output_gate = make_gate();
    p.candidate = make_gate();
  }
  return p;
}

std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> DveSideParams::named_params(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> out = {
      {prefix + ".mean", mean},
      {prefix + ".var_in", var_in},
      {prefix + ".head.w1", head_w1},
      {prefix + ".head.b1", head_b1},
      {prefix + ".head.w2", head_w2},
      {prefix + ".head.b2", head_b2},
  };
  if (mode == VarianceMode::lstm) {
    auto add_gate = [&](const char* name, const Gate& g) {
      out.emplace_back(prefix + ".lstm." + name + ".wx", g.wx);
      out.emplace_back(prefix + ".lstm." + name + ".wh", g.wh);
      out.emplace_back(prefix + ".lstm." + name + ".b", g.b);
    };
    add_gate("input", input_gate);
    add_gate("forget", forget_gate);
    add_gate("output", output_gate);
    add_gate("candidate", candidate);
  }
  return out;
}

std::vector<std::shared_ptr<Tensor>> DveSideParams::params() const {
  std::vector<std::shared_ptr<Tensor>> out;
  for (auto& [name, t] : named_params("p")) out.push_back(t);
  return out;
}

Tensor one_hot(int64_t node_id, int64_t n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("one_hot: n_nodes must be >= 1");
  if (node_id < 0 || node_id >= n_nodes)
    throw std::out_of_range("one_hot: id " + std::to_string(node_id) + " out of range [0," +
                            std::to_string(n_nodes) + ")");
  Tensor t({n_nodes});
  t.at(node_id) = 1.0;
  return t;
}

Tensor mean_embedding(const DveSideParams& params, int64_t node_id) {
  const Tensor& m = *params.mean;
  if (node_id < 0 || node_id >= m.rows())
    throw std::out_of_range("mean_embedding: id " + std::to_string(node_id) + " out of range [0," +
                            std::to_string(m.rows()) + ")");
  std::vector<double> row(m.data().begin() + node_id * m.cols(),
                          m.data().begin() + (node_id + 1) * m.cols());
  return Tensor::vec(std::move(row));
}

BoundSide bind_side(Graph& g, const DveSideParams& p) {
  BoundSide s;
  s.mean = g.leaf(p.mean);
  s.var_in = g.leaf(p.var_in);
  s.head_w1 = g.leaf(p.head_w1);
  s.head_b1 = g.leaf(p.head_b1);
  s.head_w2 = g.leaf(p.head_w2);
  s.head_b2 = g.leaf(p.head_b2);
  if (p.mode == VarianceMode::lstm) {
    auto bind_gate = [&](const DveSideParams::Gate& src) {
      BoundSide::Gate b;
      b.wx = g.leaf(src.wx);
      b.wh = g.leaf(src.wh);
      b.b = g.leaf(src.b);
      return b;
    };
    s.input = bind_gate(p.input_gate);
    s.forget = bind_gate(p.forget_gate);
    s.output = bind_gate(p.output_gate);
    s.candidate = bind_gate(p.candidate);
  }
  return s;
}

NodeId apply_g(Graph& g, NodeId x, GActivation act) {
  switch (act) {
    case GActivation::relu: return g.relu(x);
    case GActivation::abs: return g.abs(x);
    case GActivation::square: return g.square(x);
  }
  throw std::invalid_argument("apply_g: unknown activation");
}

NodeId variance_head_nodes(Graph& g, const BoundSide& side, NodeId input, GActivation act) {
  NodeId hidden = g.relu(g.add(g.matmul(input, side.head_w1), side.head_b1));
  NodeId pre = g.add(g.matmul(hidden, side.head_w2), side.head_b2);
  return apply_g(g, pre, act);
}

LstmNodes lstm_step_nodes(Graph& g, const BoundSide& side, NodeId x, NodeId h_prev, NodeId c_prev) {
  auto gate_pre = [&](const BoundSide::Gate& w) {
    return g.add(g.add(g.matmul(x, w.wx), g.matmul(h_prev, w.wh)), w.b);
  };
  NodeId in = g.sigmoid(gate_pre(side.input));
  NodeId forget = g.sigmoid(gate_pre(side.forget));
  NodeId out = g.sigmoid(gate_pre(side.output));
  NodeId cand = g.tanh(gate_pre(side.candidate));
  LstmNodes next;
  next.c = g.add(g.mul(forget, c_prev), g.mul(in, cand));
  next.h = g.mul(out, g.tanh(next.c));
  return next;
}

double static_variance(const DveSideParams& params, int64_t node_id, Precision precision) {
  if (params.mode != VarianceMode::fixed)
    throw StateError("static_variance: side is configured for the recurrent variance path");
  if (node_id < 0 || node_id >= params.cfg.n_nodes)
    throw std::out_of_range("static_variance: id " + std::to_string(node_id) + " out of range [0," +
                            std::to_string(params.cfg.n_nodes) + ")");
  Graph g(precision);
  BoundSide s = bind_side(g, params);
  NodeId x = g.gather_rows(s.var_in, {node_id});
  NodeId sigma = variance_head_nodes(g, s, x, params.cfg.g);
  return g.value(sigma).at(0);
}

std::pair<Tensor, Tensor> lstm_step(const Tensor& h, const Tensor& c, const Tensor& x,
                                    const DveSideParams& params, Precision precision) {
  if (params.mode != VarianceMode::lstm) throw StateError("lstm_step: side has no LSTM parameters");
  Graph g(precision);
  BoundSide s = bind_side(g, params);
  LstmNodes next = lstm_step_nodes(g, s, g.constant(x), g.constant(h), g.constant(c));
  return {g.value(next.h), g.value(next.c)};
}

NodeEmbeddingState initial_state(const DveSideParams& params, int64_t node_id) {
  if (node_id < 0 || node_id >= params.cfg.n_nodes)
    throw std::out_of_range("initial_state: id out of range");
  NodeEmbeddingState st;
  st.node_id = node_id;
  st.current_bin = 0;
  st.h = Tensor({1, params.cfg.lstm_hidden_dim});
  st.c = Tensor({1, params.cfg.lstm_hidden_dim});
  st.sigma2 = 0.0;
  return st;
}

NodeEmbeddingState advance_variance(const NodeEmbeddingState& state, const DveSideParams& params,
                                    Precision precision) {
  if (params.mode != VarianceMode::lstm)
    throw StateError("advance_variance: side is configured for the static variance path");
  Graph g(precision);
  BoundSide s = bind_side(g, params);
  NodeId x = g.gather_rows(s.var_in, {state.node_id});
  LstmNodes next = lstm_step_nodes(g, s, x, g.constant(state.h), g.constant(state.c));
  NodeId sigma = variance_head_nodes(g, s, next.h, params.cfg.g);

  NodeEmbeddingState out;
  out.node_id = state.node_id;
  out.current_bin = state.current_bin + 1;
  out.h = g.value(next.h);
  out.c = g.value(next.c);
  out.sigma2 = g.value(sigma).at(0);
  return out;
}

double variance_at_bin(const DveSideParams& params, int64_t node_id, int64_t bin,
                       Precision precision) {
  if (bin < 1) throw std::out_of_range("variance_at_bin: bin must be >= 1");
  if (params.mode == VarianceMode::fixed) return static_variance(params, node_id, precision);
  NodeEmbeddingState st = initial_state(params, node_id);
  for (int64_t t = 0; t < bin; ++t) st = advance_variance(st, params, precision);
  return st.sigma2;
}

Tensor sample_embedding(const Tensor& mu, double sigma2, const Tensor& eps, SampleMode mode) {
  if (sigma2 < 0.0) throw StateError("sample_embedding: negative variance");
  if (mode == SampleMode::mean) return mu;
  if (!mu.same_shape(eps))
    throw std::invalid_argument("sample_embedding: mu " + mu.shape_str() + " vs eps " +
                                eps.shape_str());
  Tensor w = mu;
  const double sd = std::sqrt(sigma2);
  for (int64_t i = 0; i < w.size(); ++i) w.at(i) += sd * eps.at(i);
  return w;
}

void StateCache::reset(const DveSideParams& params) {
  states_.clear();
  states_.reserve(static_cast<size_t>(params.cfg.n_nodes));
  for (int64_t i = 0; i < params.cfg.n_nodes; ++i) states_.push_back(initial_state(params, i));
}

const NodeEmbeddingState& StateCache::state(int64_t node) const {
  return states_.at(static_cast<size_t>(node));
}

const NodeEmbeddingState& StateCache::advance_to(int64_t node, int64_t target_bin,
                                                 const DveSideParams& params, Precision precision) {
  NodeEmbeddingState& st = states_.at(static_cast<size_t>(node));
  if (st.current_bin > target_bin)
    throw StateError("StateCache: node " + std::to_string(node) + " already at bin " +
                     std::to_string(st.current_bin) + " > " + std::to_string(target_bin));
  while (st.current_bin < target_bin) st = advance_variance(st, params, precision);
  return st;
}

}  // namespace dverec
