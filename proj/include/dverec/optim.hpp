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
#include <unordered_map>
#include <vector>

#include "dverec/tensor.hpp"

namespace dverec {

enum class OptimizerKind { sgd, adam };

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// SGD / Adam over externally owned parameter tensors. Adam keeps
/// first/second moments per parameter (same shape), created lazily on the
/// first step; the step counter is shared by all parameters. Moment math
/// runs in double; updated parameters are rounded to the given precision.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, Precision precision = Precision::f64,
            AdamConfig adam = {});

  /// One update step. params[i] is updated in place from grads[i]; a null
  /// or shape-mismatched gradient is a StateError.
  void step(const std::vector<std::shared_ptr<Tensor>>& params,
            const std::vector<const Tensor*>& grads);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  int64_t step_count() const { return step_count_; }

 private:
  struct Moments {
    Tensor m, v;
  };

  OptimizerKind kind_;
  double lr_;
  Precision precision_;
  AdamConfig adam_;
  int64_t step_count_ = 0;
  std::unordered_map<Tensor*, Moments> moments_;
};

}  // namespace dverec
