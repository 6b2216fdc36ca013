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

#include "dverec/ncf.hpp"

#include <algorithm>
#include <cmath>

#include "dverec/init.hpp"

namespace dverec {

namespace {

constexpr double kSqrtFloor = 1e-12;  // added under sqrt on the tape only

void check_node_id(const char* what, int64_t id, int64_t n) {
  if (id < 0 || id >= n)
    throw LookupError(std::string(what) + " id " + std::to_string(id) + " out of range [0," +
                      std::to_string(n) + ")");
}

// distinct sorted ids plus the position of each original entry
struct Dedup {
  std::vector<int64_t> unique;
  std::vector<int64_t> row_of;  // per original entry, row in `unique`
};

Dedup dedup(const std::vector<int64_t>& ids) {
  Dedup d;
  d.unique = ids;
  std::sort(d.unique.begin(), d.unique.end());
  d.unique.erase(std::unique(d.unique.begin(), d.unique.end()), d.unique.end());
  d.row_of.reserve(ids.size());
  for (int64_t id : ids) {
    auto it = std::lower_bound(d.unique.begin(), d.unique.end(), id);
    d.row_of.push_back(it - d.unique.begin());
  }
  return d;
}

// variances [K,1] for K distinct nodes at `bin`, unrolled from zeros on the tape
NodeId unrolled_variances(Graph& g, const BoundSide& s, const DveSideParams& p,
                          const std::vector<int64_t>& nodes, int64_t bin) {
  const int64_t k = static_cast<int64_t>(nodes.size());
  NodeId x = g.gather_rows(s.var_in, nodes);
  NodeId h = g.constant(Tensor({k, p.cfg.lstm_hidden_dim}));
  NodeId c = g.constant(Tensor({k, p.cfg.lstm_hidden_dim}));
  for (int64_t t = 0; t < bin; ++t) {
    LstmNodes next = lstm_step_nodes(g, s, x, h, c);
    h = next.h;
    c = next.c;
  }
  return variance_head_nodes(g, s, h, p.cfg.g);
}

// variances [K,1] via one on-tape step from cached states at bin-1
NodeId stepped_variances(Graph& g, const BoundSide& s, const DveSideParams& p,
                         const std::vector<int64_t>& nodes, const StateCache& cache, int64_t bin) {
  const int64_t k = static_cast<int64_t>(nodes.size());
  Tensor h_prev({k, p.cfg.lstm_hidden_dim});
  Tensor c_prev({k, p.cfg.lstm_hidden_dim});
  for (int64_t i = 0; i < k; ++i) {
    const NodeEmbeddingState& st = cache.state(nodes[i]);
    if (st.current_bin != bin - 1)
      throw StateError("stepped_variances: cached state for node " + std::to_string(nodes[i]) +
                       " is at bin " + std::to_string(st.current_bin) + ", expected " +
                       std::to_string(bin - 1));
    for (int64_t j = 0; j < p.cfg.lstm_hidden_dim; ++j) {
      h_prev(i, j) = st.h.at(j);
      c_prev(i, j) = st.c.at(j);
    }
  }
  NodeId x = g.gather_rows(s.var_in, nodes);
  LstmNodes next = lstm_step_nodes(g, s, x, g.constant(std::move(h_prev)), g.constant(std::move(c_prev)));
  return variance_head_nodes(g, s, next.h, p.cfg.g);
}

NodeId fixed_variances(Graph& g, const BoundSide& s, const DveSideParams& p,
                       const std::vector<int64_t>& nodes) {
  NodeId x = g.gather_rows(s.var_in, nodes);
  return variance_head_nodes(g, s, x, p.cfg.g);
}

// one side's [B,R] embeddings for a batch
NodeId side_embeddings(Graph& g, const DveModel& model, const DveSideParams& p,
                       const std::vector<int64_t>& ids, const BatchSpec& spec, const Tensor& eps,
                       const StateCache* cache) {
  BoundSide s = bind_side(g, p);
  NodeId means = g.gather_rows(s.mean, ids);
  if (spec.source == VarianceSource::none) return means;

  const int64_t b = static_cast<int64_t>(ids.size());
  if (eps.rank() != 2 || eps.shape()[0] != b || eps.shape()[1] != p.cfg.dim)
    throw std::invalid_argument("batch_predictions: eps must be [B,R]");

  Dedup d = dedup(ids);
  NodeId sigma_unique;
  if (p.mode == VarianceMode::fixed) {
    sigma_unique = fixed_variances(g, s, p, d.unique);
  } else if (spec.source == VarianceSource::unroll) {
    sigma_unique = unrolled_variances(g, s, p, d.unique, spec.bin);
  } else {
    if (!cache) throw StateError("batch_predictions: cache source without a cache");
    sigma_unique = stepped_variances(g, s, p, d.unique, *cache, spec.bin);
  }
  NodeId sigma = g.gather_rows(sigma_unique, d.row_of);  // [B,1]
  NodeId sd = g.sqrt(g.add(sigma, g.constant(Tensor::scalar(kSqrtFloor))));
  NodeId z = g.mul(sd, g.constant(eps));  // column broadcast to [B,R]
  (void)model;
  return g.add(means, z);
}

}  // namespace

NcfTower NcfTower::create(int64_t input_dim, std::vector<int64_t> dims, OutputHead head,
                          std::mt19937_64& rng, Precision precision) {
  if (input_dim < 1) throw std::invalid_argument("NcfTower: input_dim must be >= 1");
  if (dims.empty()) throw std::invalid_argument("NcfTower: at least one layer required");
  for (int64_t d : dims)
    if (d < 1) throw std::invalid_argument("NcfTower: layer widths must be >= 1");

  NcfTower t;
  t.layer_dims = std::move(dims);
  t.head = head;
  int64_t in = input_dim;
  for (int64_t width : t.layer_dims) {
    t.weights.push_back(fan_in_uniform_param(in, width, rng, precision));
    t.biases.push_back(zeros_param({1, width}));
    in = width;
  }
  t.out_w = fan_in_uniform_param(in, 1, rng, precision);
  t.out_b = zeros_param({1, 1});
  return t;
}

std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> NcfTower::named_params(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> out;
  for (size_t i = 0; i < weights.size(); ++i) {
    out.emplace_back(prefix + ".layer" + std::to_string(i) + ".w", weights[i]);
    out.emplace_back(prefix + ".layer" + std::to_string(i) + ".b", biases[i]);
  }
  out.emplace_back(prefix + ".out.w", out_w);
  out.emplace_back(prefix + ".out.b", out_b);
  return out;
}

std::vector<std::shared_ptr<Tensor>> NcfTower::params() const {
  std::vector<std::shared_ptr<Tensor>> out;
  for (auto& [name, t] : named_params("t")) out.push_back(t);
  return out;
}

BoundTower bind_tower(Graph& g, const NcfTower& tower) {
  BoundTower b;
  for (size_t i = 0; i < tower.weights.size(); ++i) {
    b.w.push_back(g.leaf(tower.weights[i]));
    b.b.push_back(g.leaf(tower.biases[i]));
  }
  b.out_w = g.leaf(tower.out_w);
  b.out_b = g.leaf(tower.out_b);
  return b;
}

NodeId tower_nodes(Graph& g, const BoundTower& bound, NodeId x, OutputHead head, bool apply_head) {
  NodeId h = x;
  for (size_t i = 0; i < bound.w.size(); ++i)
    h = g.relu(g.add(g.matmul(h, bound.w[i]), bound.b[i]));
  NodeId out = g.add(g.matmul(h, bound.out_w), bound.out_b);
  if (apply_head && head == OutputHead::logistic) out = g.sigmoid(out);
  return out;
}

double interact(const Tensor& w, const Tensor& q, const NcfTower& tower, Precision precision) {
  if (w.size() + q.size() != tower.input_dim())
    throw std::invalid_argument("interact: embedding widths " + std::to_string(w.size()) + "+" +
                                std::to_string(q.size()) + " do not match tower input " +
                                std::to_string(tower.input_dim()));
  std::vector<double> row;
  row.reserve(w.size() + q.size());
  row.insert(row.end(), w.data().begin(), w.data().end());
  row.insert(row.end(), q.data().begin(), q.data().end());

  Graph g(precision);
  BoundTower bt = bind_tower(g, tower);
  NodeId score = tower_nodes(g, bt, g.constant(Tensor::row(std::move(row))), tower.head);
  return g.value(score).at(0);
}

DveModel DveModel::create(const ModelConfig& cfg, int64_t n_users, int64_t n_items,
                          int64_t time_bins, uint64_t seed) {
  if (time_bins < 1) throw std::invalid_argument("DveModel: time_bins must be >= 1");
  DveModel m;
  m.cfg = cfg;
  m.time_bins = time_bins;

  auto side_cfg = [&](int64_t n) {
    EmbeddingConfig e;
    e.n_nodes = n;
    e.dim = cfg.embedding_dim;
    e.variance_hidden_dim = cfg.variance_hidden_dim;
    e.head_hidden_dim = cfg.head_hidden_dim;
    e.lstm_hidden_dim = cfg.lstm_hidden_dim;
    e.g = cfg.g;
    return e;
  };

  std::mt19937_64 rng(seed);
  m.user = DveSideParams::create(side_cfg(n_users), cfg.variance_mode, rng, cfg.precision);
  m.item = DveSideParams::create(side_cfg(n_items), cfg.variance_mode, rng, cfg.precision);
  m.tower = NcfTower::create(2 * cfg.embedding_dim, cfg.tower_dims, cfg.head(), rng, cfg.precision);
  return m;
}

std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> DveModel::named_params() const {
  std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> out = user.named_params("user");
  auto items = item.named_params("item");
  out.insert(out.end(), items.begin(), items.end());
  auto tw = tower.named_params("tower");
  out.insert(out.end(), tw.begin(), tw.end());
  return out;
}

std::vector<std::shared_ptr<Tensor>> DveModel::params() const {
  std::vector<std::shared_ptr<Tensor>> out;
  for (auto& [name, t] : named_params()) out.push_back(t);
  return out;
}

std::vector<double> score_items(const DveModel& model, int64_t user,
                                const std::vector<int64_t>& items, int64_t bin, SampleMode mode,
                                std::mt19937_64* rng, TimePolicy policy) {
  check_node_id("user", user, model.n_users());
  for (int64_t it : items) check_node_id("item", it, model.n_items());
  if (bin < 1 || bin > model.time_bins)
    throw std::out_of_range("score_items: bin " + std::to_string(bin) + " outside [1," +
                            std::to_string(model.time_bins) + "]");
  if (items.empty()) return {};

  const int64_t r = model.cfg.embedding_dim;
  Tensor w_user = mean_embedding(model.user, user);

  // the variance path follows the time policy; the mean path never does
  int64_t var_bin = bin;
  if (policy == TimePolicy::freeze && model.train_horizon >= 1)
    var_bin = std::min(bin, model.train_horizon);

  std::vector<Tensor> q_items;
  q_items.reserve(items.size());
  for (int64_t it : items) q_items.push_back(mean_embedding(model.item, it));

  if (mode == SampleMode::sample) {
    if (!rng) throw std::invalid_argument("score_items: sample mode needs an rng");
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&]() {
      Tensor eps({r});
      for (double& v : eps.data()) v = normal(*rng);
      return eps;
    };
    const double su = variance_at_bin(model.user, user, var_bin, Precision::f64);
    Tensor eps_u = draw();
    w_user = sample_embedding(w_user, su, eps_u, SampleMode::sample);
    // per-item variances; duplicate items get independent draws
    for (size_t i = 0; i < items.size(); ++i) {
      const double sv = variance_at_bin(model.item, items[i], var_bin, Precision::f64);
      q_items[i] = sample_embedding(q_items[i], sv, draw(), SampleMode::sample);
    }
  }

  Tensor input({static_cast<int64_t>(items.size()), 2 * r});
  for (size_t i = 0; i < items.size(); ++i) {
    for (int64_t j = 0; j < r; ++j) {
      input(static_cast<int64_t>(i), j) = w_user.at(j);
      input(static_cast<int64_t>(i), r + j) = q_items[i].at(j);
    }
  }

  Graph g(Precision::f64);
  BoundTower bt = bind_tower(g, model.tower);
  NodeId scores = tower_nodes(g, bt, g.constant(std::move(input)), model.tower.head);
  return g.value(scores).data();
}

Prediction predict(const DveModel& model, int64_t user, int64_t item, int64_t bin, SampleMode mode,
                   std::mt19937_64* rng, TimePolicy policy) {
  std::vector<double> s = score_items(model, user, {item}, bin, mode, rng, policy);
  Prediction p;
  p.user = user;
  p.item = item;
  p.bin = bin;
  p.score = s.at(0);
  p.mode = mode;
  return p;
}

NodeId batch_predictions(Graph& g, const DveModel& model, const BatchSpec& spec) {
  if (spec.users.size() != spec.items.size())
    throw std::invalid_argument("batch_predictions: users/items length mismatch");
  if (spec.users.empty()) throw std::invalid_argument("batch_predictions: empty batch");
  for (int64_t u : spec.users) check_node_id("user", u, model.n_users());
  for (int64_t v : spec.items) check_node_id("item", v, model.n_items());
  if (spec.bin < 1) throw std::out_of_range("batch_predictions: bin must be >= 1");

  NodeId w = side_embeddings(g, model, model.user, spec.users, spec, spec.eps_user,
                             spec.user_cache);
  NodeId q = side_embeddings(g, model, model.item, spec.items, spec, spec.eps_item,
                             spec.item_cache);
  BoundTower bt = bind_tower(g, model.tower);
  return tower_nodes(g, bt, g.concat(w, q), model.tower.head);
}

}  // namespace dverec
