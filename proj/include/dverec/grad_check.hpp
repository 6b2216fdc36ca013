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

#include <functional>
#include <memory>
#include <vector>

#include "dverec/graph.hpp"

namespace dverec {

/// Builds a scalar loss on the given graph; params[i] is already bound as
/// leaf node ids[i]. The builder must be a pure function of the parameter
/// values so it can be re-run under perturbation.
using LossBuilder = std::function<NodeId(Graph&, const std::vector<NodeId>&)>;

/// Central finite-difference check of the tape gradients, always in f64.
/// Returns the max over all parameter entries of
///   |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double grad_check(const LossBuilder& build, const std::vector<std::shared_ptr<Tensor>>& params,
                  double eps = 1e-5);

}  // namespace dverec
