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

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dverec/dve.hpp"

namespace dverec {

enum class OutputHead { identity, logistic };
enum class TaskKind { explicit_feedback, implicit_feedback };

/// What to do with the variance path at evaluation bins past the last bin
/// seen in training: keep advancing the recurrence, or freeze it there.
enum class TimePolicy { advance, freeze };

/// Stack of dense relu layers over the concatenated user/item embeddings,
/// followed by a scalar affine map and the task head.
struct NcfTower {
  std::vector<int64_t> layer_dims;
  OutputHead head = OutputHead::identity;
  std::vector<std::shared_ptr<Tensor>> weights;  // [in, out] per layer
  std::vector<std::shared_ptr<Tensor>> biases;   // [1, out] per layer
  std::shared_ptr<Tensor> out_w, out_b;          // [last, 1], [1, 1]

  int64_t input_dim() const { return weights.empty() ? 0 : weights.front()->shape()[0]; }

  static NcfTower create(int64_t input_dim, std::vector<int64_t> dims, OutputHead head,
                         std::mt19937_64& rng, Precision precision);

  std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> named_params(
      const std::string& prefix) const;
  std::vector<std::shared_ptr<Tensor>> params() const;
};

struct BoundTower {
  std::vector<NodeId> w, b;
  NodeId out_w = -1, out_b = -1;
};

BoundTower bind_tower(Graph& g, const NcfTower& tower);

/// x [B, input_dim] -> scores [B, 1].
NodeId tower_nodes(Graph& g, const BoundTower& bound, NodeId x, OutputHead head,
                   bool apply_head = true);

/// Score one (user embedding, item embedding) pair through the tower.
double interact(const Tensor& w, const Tensor& q, const NcfTower& tower,
                Precision precision = Precision::f64);

struct ModelConfig {
  TaskKind task = TaskKind::explicit_feedback;
  int64_t embedding_dim = 16;  // R
  std::vector<int64_t> tower_dims = {64, 32, 16};
  GActivation g = GActivation::relu;
  VarianceMode variance_mode = VarianceMode::lstm;
  int64_t variance_hidden_dim = 16;
  int64_t head_hidden_dim = 16;
  int64_t lstm_hidden_dim = 16;
  Precision precision = Precision::f32;

  OutputHead head() const {
    return task == TaskKind::implicit_feedback ? OutputHead::logistic : OutputHead::identity;
  }
};

/// The full recommender: one DVE side per node set plus the interaction
/// tower. Recurrent variance states are a pure function of the parameters
/// (the per-node input is constant over time), so the model carries no
/// runtime state of its own.
struct DveModel {
  ModelConfig cfg;
  DveSideParams user, item;
  NcfTower tower;
  int64_t time_bins = 1;      // T: latest ingested bin
  int64_t train_horizon = 0;  // last bin the model was trained on (0 = none)

  int64_t n_users() const { return user.cfg.n_nodes; }
  int64_t n_items() const { return item.cfg.n_nodes; }

  static DveModel create(const ModelConfig& cfg, int64_t n_users, int64_t n_items,
                         int64_t time_bins, uint64_t seed);

  std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> named_params() const;
  std::vector<std::shared_ptr<Tensor>> params() const;
};

struct Prediction {
  int64_t user = 0, item = 0, bin = 0;
  double score = 0.0;
  SampleMode mode = SampleMode::mean;
};

/// Scores one user against a list of candidate items at a time bin.
/// mean mode is a pure function of the parameters; sample mode draws one
/// standard-normal vector per node occurrence from `rng` (user first,
/// then items in list order).
std::vector<double> score_items(const DveModel& model, int64_t user,
                                const std::vector<int64_t>& items, int64_t bin, SampleMode mode,
                                std::mt19937_64* rng = nullptr,
                                TimePolicy policy = TimePolicy::advance);

Prediction predict(const DveModel& model, int64_t user, int64_t item, int64_t bin, SampleMode mode,
                   std::mt19937_64* rng = nullptr, TimePolicy policy = TimePolicy::advance);

// ---- batched tape forward (training and gradient checks) -------------------

/// How the batch obtains each node's variance at the batch bin.
///   none:   mean mode, no variance path on the tape
///   unroll: full recurrence from zeros on the tape (exact, O(bin) steps)
///   cache:  one on-tape step from cached states at bin-1
/// `fixed` variance mode ignores the distinction and uses the static path.
enum class VarianceSource { none, unroll, cache };

struct BatchSpec {
  std::vector<int64_t> users, items;  // length B, parallel arrays
  int64_t bin = 1;
  VarianceSource source = VarianceSource::none;
  Tensor eps_user, eps_item;  // [B, R], required unless source == none
  const StateCache* user_cache = nullptr;  // states at bin-1, source == cache
  const StateCache* item_cache = nullptr;
};

/// Predictions [B,1] for a batch of (user, item) pairs at one bin.
NodeId batch_predictions(Graph& g, const DveModel& model, const BatchSpec& spec);

}  // namespace dverec
