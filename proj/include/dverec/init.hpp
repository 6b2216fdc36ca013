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

#include <cmath>
#include <memory>
#include <random>

#include "dverec/tensor.hpp"

namespace dverec {

/// Embedding-table init: N(0, std^2) entries, row-major draw order.
inline std::shared_ptr<Tensor> gaussian_param(std::vector<int64_t> shape, double stddev,
                                              std::mt19937_64& rng, Precision precision) {
  auto t = std::make_shared<Tensor>(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t->data()) v = round_scalar(dist(rng), precision);
  t->set_requires_grad(true);
  return t;
}

/// Dense-layer init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for [in, out] weights.
inline std::shared_ptr<Tensor> fan_in_uniform_param(int64_t fan_in, int64_t fan_out,
                                                    std::mt19937_64& rng, Precision precision) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  auto t = std::make_shared<Tensor>(std::vector<int64_t>{fan_in, fan_out});
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t->data()) v = round_scalar(dist(rng), precision);
  t->set_requires_grad(true);
  return t;
}

inline std::shared_ptr<Tensor> zeros_param(std::vector<int64_t> shape) {
  auto t = std::make_shared<Tensor>(std::move(shape));
  t->set_requires_grad(true);
  return t;
}

}  // namespace dverec
