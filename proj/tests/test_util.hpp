#pragma once

#include <memory>
#include <random>
#include <vector>

#include "dverec/tensor.hpp"

namespace dverec::testutil {

inline std::shared_ptr<Tensor> random_param(std::vector<int64_t> shape, std::mt19937_64& rng,
                                            double lo = -0.8, double hi = 0.8) {
  auto t = std::make_shared<Tensor>(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t->data()) v = dist(rng);
  t->set_requires_grad(true);
  return t;
}

// random values bounded away from zero, for ops with a kink at the origin
inline std::shared_ptr<Tensor> random_param_off_zero(std::vector<int64_t> shape,
                                                     std::mt19937_64& rng, double margin = 0.2) {
  auto t = random_param(std::move(shape), rng);
  for (double& v : t->data()) {
    if (v >= 0.0 && v < margin) v += margin;
    if (v < 0.0 && v > -margin) v -= margin;
  }
  return t;
}

inline std::shared_ptr<Tensor> random_positive_param(std::vector<int64_t> shape,
                                                     std::mt19937_64& rng, double lo = 0.3,
                                                     double hi = 2.0) {
  auto t = std::make_shared<Tensor>(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t->data()) v = dist(rng);
  t->set_requires_grad(true);
  return t;
}

}  // namespace dverec::testutil
