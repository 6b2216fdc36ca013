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
#include <utility>
#include <vector>

#include "dverec/graph.hpp"

namespace dverec {

/// Activation that maps the variance pre-activation to a non-negative
/// scalar: max{0,x}, |x|, or x^2.
enum class GActivation { relu, abs, square };

/// How a node's embedding variance is produced: `fixed` is the
/// time-invariant dense path, `lstm` evolves it over time bins with a
/// recurrent cell. The two are distinct configurations of one side; they
/// do not share head parameters.
enum class VarianceMode { fixed, lstm };

enum class SampleMode { sample, mean };

struct EmbeddingConfig {
  int64_t n_nodes = 0;
  int64_t dim = 16;                 // embedding width R
  int64_t variance_hidden_dim = 16; // width of the per-node variance embedding
  int64_t head_hidden_dim = 16;     // hidden width of the variance output stack
  int64_t lstm_hidden_dim = 16;
  GActivation g = GActivation::relu;

  void validate() const;
};

/// All trainable tensors of one node set (users or items). Embedding
/// tables are stored row-major with one row per node: `mean` row i is the
/// node's mean embedding, `var_in` row i its variance embedding. The
/// variance head is a dense layer with relu followed by a scalar output;
/// its input width is the variance embedding width in `fixed` mode and
/// the LSTM hidden width in `lstm` mode.
struct DveSideParams {
  EmbeddingConfig cfg;
  VarianceMode mode = VarianceMode::lstm;

  std::shared_ptr<Tensor> mean;    // [n, R]
  std::shared_ptr<Tensor> var_in;  // [n, Hv]

  std::shared_ptr<Tensor> head_w1, head_b1;  // [D, Hh], [1, Hh]
  std::shared_ptr<Tensor> head_w2, head_b2;  // [Hh, 1], [1, 1]

  struct Gate {
    std::shared_ptr<Tensor> wx;  // [Hv, Hl]
    std::shared_ptr<Tensor> wh;  // [Hl, Hl]
    std::shared_ptr<Tensor> b;   // [1, Hl]
  };
  Gate input_gate, forget_gate, output_gate, candidate;  // lstm mode only

  int64_t head_input_dim() const {
    return mode == VarianceMode::lstm ? cfg.lstm_hidden_dim : cfg.variance_hidden_dim;
  }

  static DveSideParams create(const EmbeddingConfig& cfg, VarianceMode mode, std::mt19937_64& rng,
                              Precision precision);

  std::vector<std::pair<std::string, std::shared_ptr<Tensor>>> named_params(
      const std::string& prefix) const;
  std::vector<std::shared_ptr<Tensor>> params() const;
};

/// Immutable snapshot of one node's recurrent variance state after
/// `current_bin` advances (bin 0 = fresh zeros, nothing advanced yet).
struct NodeEmbeddingState {
  int64_t node_id = 0;
  int64_t current_bin = 0;
  Tensor h, c;  // [1, Hl]
  double sigma2 = 0.0;
};

// ---- value-level operations ------------------------------------------------

Tensor one_hot(int64_t node_id, int64_t n_nodes);

/// Row `node_id` of the mean table as an R-vector (identical to the
/// matrix product of the mean matrix with the node's one-hot vector).
Tensor mean_embedding(const DveSideParams& params, int64_t node_id);

/// Time-invariant variance (fixed mode only).
double static_variance(const DveSideParams& params, int64_t node_id,
                       Precision precision = Precision::f64);

/// One LSTM cell application on row vectors; pure function of its inputs.
std::pair<Tensor, Tensor> lstm_step(const Tensor& h, const Tensor& c, const Tensor& x,
                                    const DveSideParams& params,
                                    Precision precision = Precision::f64);

NodeEmbeddingState initial_state(const DveSideParams& params, int64_t node_id);

/// Feed the node's constant variance embedding through one LSTM step and
/// re-read the variance head: the state at bin t+1. The input state is
/// not mutated.
NodeEmbeddingState advance_variance(const NodeEmbeddingState& state, const DveSideParams& params,
                                    Precision precision = Precision::f64);

/// Variance at a given bin, recomputed from zeros (lstm) or the static
/// path (fixed). bin must be >= 1.
double variance_at_bin(const DveSideParams& params, int64_t node_id, int64_t bin,
                       Precision precision = Precision::f64);

/// w = mu + sqrt(sigma2) * eps (sample mode) or w = mu (mean mode).
Tensor sample_embedding(const Tensor& mu, double sigma2, const Tensor& eps, SampleMode mode);

// ---- tape builders (shared by training, prediction and grad checks) --------

struct BoundSide {
  NodeId mean = -1, var_in = -1;
  NodeId head_w1 = -1, head_b1 = -1, head_w2 = -1, head_b2 = -1;
  struct Gate {
    NodeId wx = -1, wh = -1, b = -1;
  };
  Gate input, forget, output, candidate;
};

BoundSide bind_side(Graph& g, const DveSideParams& params);

NodeId apply_g(Graph& g, NodeId x, GActivation act);

/// Dense-relu-dense head plus g: [K, D] -> [K, 1] of variances.
NodeId variance_head_nodes(Graph& g, const BoundSide& side, NodeId input, GActivation act);

struct LstmNodes {
  NodeId h = -1, c = -1;
};

/// One LSTM step for K stacked nodes: x [K,Hv], h/c [K,Hl] -> h'/c' [K,Hl].
LstmNodes lstm_step_nodes(Graph& g, const BoundSide& side, NodeId x, NodeId h_prev, NodeId c_prev);

// ---- per-node state cache used by the chronological training loop ----------

/// Latest advanced state per node. Reads are cheap; advance_to replays
/// the recurrence through any skipped bins so a node's state at bin t is
/// always the t-step unroll under the parameters used for each step.
class StateCache {
 public:
  void reset(const DveSideParams& params);
  bool empty() const { return states_.empty(); }
  const NodeEmbeddingState& state(int64_t node) const;
  const NodeEmbeddingState& advance_to(int64_t node, int64_t target_bin,
                                       const DveSideParams& params, Precision precision);

 private:
  std::vector<NodeEmbeddingState> states_;
};

}  // namespace dverec
