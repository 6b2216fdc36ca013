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

#include "dverec/optim.hpp"

#include <cmath>

namespace dverec {

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, Precision precision, AdamConfig adam)
    : kind_(kind), lr_(learning_rate), precision_(precision), adam_(adam) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("Optimizer: learning rate must be > 0");
}

void Optimizer::step(const std::vector<std::shared_ptr<Tensor>>& params,
                     const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size()) throw StateError("optimizer step: params/grads size mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (!params[i]) throw StateError("optimizer step: null parameter");
    if (!grads[i]) throw StateError("optimizer step: missing gradient for parameter " + std::to_string(i));
    if (!params[i]->same_shape(*grads[i]))
      throw StateError("optimizer step: gradient shape " + grads[i]->shape_str() +
                       " does not match parameter " + params[i]->shape_str());
  }

  ++step_count_;
  const double t = static_cast<double>(step_count_);

  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];

    if (kind_ == OptimizerKind::sgd) {
      for (int64_t j = 0; j < p.size(); ++j)
        p.at(j) = round_scalar(p.at(j) - lr_ * g.at(j), precision_);
      continue;
    }

    auto [it, fresh] = moments_.try_emplace(params[i].get());
    if (fresh) {
      it->second.m = Tensor(p.shape());
      it->second.v = Tensor(p.shape());
    }
    Tensor& m = it->second.m;
    Tensor& v = it->second.v;
    const double bc1 = 1.0 - std::pow(adam_.beta1, t);
    const double bc2 = 1.0 - std::pow(adam_.beta2, t);
    for (int64_t j = 0; j < p.size(); ++j) {
      m.at(j) = adam_.beta1 * m.at(j) + (1.0 - adam_.beta1) * g.at(j);
      v.at(j) = adam_.beta2 * v.at(j) + (1.0 - adam_.beta2) * g.at(j) * g.at(j);
      const double mhat = m.at(j) / bc1;
      const double vhat = v.at(j) / bc2;
      p.at(j) = round_scalar(p.at(j) - lr_ * mhat / (std::sqrt(vhat) + adam_.eps), precision_);
    }
  }
}

}  // namespace dverec
