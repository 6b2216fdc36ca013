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

#include "dverec/grad_check.hpp"

#include <cmath>
#include <string>

namespace dverec {

namespace {

double eval_loss(const LossBuilder& build, const std::vector<std::shared_ptr<Tensor>>& params) {
  Graph g(Precision::f64);
  std::vector<NodeId> ids;
  ids.reserve(params.size());
  for (const auto& p : params) ids.push_back(g.leaf(p));
  NodeId loss = build(g, ids);
  const Tensor& lv = g.value(loss);
  if (lv.size() != 1) throw std::invalid_argument("grad_check: loss must be scalar");
  return lv.at(0);
}

}  // namespace

double grad_check(const LossBuilder& build, const std::vector<std::shared_ptr<Tensor>>& params,
                  double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be > 0");
  for (const auto& p : params)
    if (!p || !p->requires_grad())
      throw std::invalid_argument("grad_check: every param must require gradients");

  // analytic pass; a builder may bind the params itself (e.g. through
  // bind_side), so gradients are summed over every leaf node of a param
  Graph g(Precision::f64);
  std::vector<NodeId> ids;
  for (const auto& p : params) ids.push_back(g.leaf(p));
  NodeId loss = build(g, ids);
  if (!std::isfinite(g.value(loss).at(0))) throw NumericError("grad_check: non-finite loss");
  g.backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    Tensor acc(p->shape());
    for (NodeId id : g.leaves_of(p.get()))
      if (g.has_grad(id)) {
        const Tensor& gt = g.grad(id);
        for (int64_t j = 0; j < acc.size(); ++j) acc.at(j) += gt.at(j);
      }
    analytic.push_back(std::move(acc));
  }

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = *params[pi];
    for (int64_t j = 0; j < p.size(); ++j) {
      const double saved = p.at(j);
      p.at(j) = saved + eps;
      const double up = eval_loss(build, params);
      p.at(j) = saved - eps;
      const double down = eval_loss(build, params);
      p.at(j) = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("grad_check: non-finite loss probing param " + std::to_string(pi) +
                           " entry " + std::to_string(j));
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[pi].at(j);
      const double err = std::fabs(a - numeric) / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
      if (err > worst) worst = err;
    }
  }
  return worst;
}

}  // namespace dverec
