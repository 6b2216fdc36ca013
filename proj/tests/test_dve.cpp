#include <doctest.h>

#include <cmath>
#include <random>

#include "dverec/dve.hpp"
#include "dverec/grad_check.hpp"
#include "test_util.hpp"

using namespace dverec;

namespace {

EmbeddingConfig tiny_cfg(GActivation g = GActivation::relu) {
  EmbeddingConfig cfg;
  cfg.n_nodes = 4;
  cfg.dim = 3;
  cfg.variance_hidden_dim = 3;
  cfg.head_hidden_dim = 2;
  cfg.lstm_hidden_dim = 2;
  cfg.g = g;
  return cfg;
}

DveSideParams random_side(VarianceMode mode, uint64_t seed, GActivation g = GActivation::relu) {
  std::mt19937_64 rng(seed);
  return DveSideParams::create(tiny_cfg(g), mode, rng, Precision::f64);
}

void zero_all(DveSideParams& p) {
  for (auto& t : p.params())
    for (double& v : t->data()) v = 0.0;
}

}  // namespace

TEST_CASE("one_hot") {
  CHECK(one_hot(2, 4).data() == std::vector<double>{0, 0, 1, 0});
  CHECK(one_hot(0, 1).data() == std::vector<double>{1});
  CHECK_THROWS_AS(one_hot(5, 3), std::out_of_range);
}

TEST_CASE("mean_embedding") {
  auto p = random_side(VarianceMode::fixed, 1);

  SUBCASE("identity table returns the node's column") {
    // 3 nodes, R = 3, mean table = identity
    std::mt19937_64 rng(2);
    EmbeddingConfig cfg = tiny_cfg();
    cfg.n_nodes = 3;
    auto side = DveSideParams::create(cfg, VarianceMode::fixed, rng, Precision::f64);
    for (int64_t r = 0; r < 3; ++r)
      for (int64_t c = 0; c < 3; ++c) (*side.mean)(r, c) = r == c ? 1.0 : 0.0;
    CHECK(mean_embedding(side, 1).data() == std::vector<double>{0, 1, 0});
  }

  SUBCASE("gather equals the matrix product with the one-hot vector") {
    for (int64_t id = 0; id < p.cfg.n_nodes; ++id) {
      Graph g;
      NodeId oh = g.constant(Tensor({1, p.cfg.n_nodes}, one_hot(id, p.cfg.n_nodes).data()));
      NodeId prod = g.matmul(oh, g.leaf(p.mean));
      CHECK(g.value(prod).data() == mean_embedding(p, id).data());
    }
  }

  SUBCASE("default config width") {
    std::mt19937_64 rng(3);
    EmbeddingConfig cfg;  // defaults: R = 16
    cfg.n_nodes = 5;
    auto side = DveSideParams::create(cfg, VarianceMode::lstm, rng, Precision::f64);
    CHECK(mean_embedding(side, 4).size() == 16);
  }

  SUBCASE("bad id") { CHECK_THROWS_AS(mean_embedding(p, 99), std::out_of_range); }
}

TEST_CASE("static_variance") {
  SUBCASE("all-zero variance path gives exactly zero") {
    for (GActivation g : {GActivation::relu, GActivation::abs, GActivation::square}) {
      auto p = random_side(VarianceMode::fixed, 4, g);
      zero_all(p);
      CHECK(static_variance(p, 0) == 0.0);
    }
  }

  SUBCASE("pre-activation -2 under each g") {
    auto make = [&](GActivation g) {
      auto p = random_side(VarianceMode::fixed, 5, g);
      zero_all(p);
      p.head_b2->at(0) = -2.0;  // pre-activation is exactly the output bias
      return p;
    };
    CHECK(static_variance(make(GActivation::relu), 1) == 0.0);
    CHECK(static_variance(make(GActivation::abs), 1) == 2.0);
    CHECK(static_variance(make(GActivation::square), 1) == 4.0);
  }

  SUBCASE("rejects the recurrent-mode side") {
    auto p = random_side(VarianceMode::lstm, 6);
    CHECK_THROWS_AS(static_variance(p, 0), StateError);
  }
}

TEST_CASE("lstm_step") {
  auto p = random_side(VarianceMode::lstm, 7);
  const int64_t hl = p.cfg.lstm_hidden_dim;

  SUBCASE("zero weights and state stay at zero") {
    zero_all(p);
    Tensor h({1, hl}), c({1, hl}), x({1, p.cfg.variance_hidden_dim}, 0.37);
    auto [h2, c2] = lstm_step(h, c, x, p);
    for (double v : h2.data()) CHECK(v == 0.0);
    for (double v : c2.data()) CHECK(v == 0.0);
  }

  SUBCASE("zero weights, carried cell state decays through the forget gate") {
    zero_all(p);
    Tensor h({1, hl}), c({1, hl}, 1.0), x({1, p.cfg.variance_hidden_dim});
    auto [h2, c2] = lstm_step(h, c, x, p);
    // gates all sigmoid(0) = 0.5, candidate tanh(0) = 0
    for (double v : c2.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    for (double v : h2.data())
      CHECK(v == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-12));  // ~0.23105857863
  }

  SUBCASE("gradient through a 3-step unroll") {
    // put the check at a well-conditioned point: O(1) recurrent inputs, a
    // filled cell state so every gate matters, and relu inputs away from 0
    for (double& v : p.var_in->data()) v *= 80.0;
    for (double& v : p.head_b1->data()) v = 0.25;
    p.head_b2->at(0) = 0.3;
    for (double& v : p.candidate.b->data()) v = 0.5;
    for (double& v : p.forget_gate.b->data()) v = 0.2;
    for (double& v : p.input_gate.b->data()) v = 0.1;
    auto build = [&](Graph& g, const std::vector<NodeId>&) {
      BoundSide s = bind_side(g, p);
      NodeId x = g.gather_rows(s.var_in, {1});
      NodeId h = g.constant(Tensor({1, hl}));
      NodeId c = g.constant(Tensor({1, hl}));
      NodeId total = g.constant(Tensor::scalar(0.0));
      for (int step = 0; step < 3; ++step) {
        LstmNodes next = lstm_step_nodes(g, s, x, h, c);
        h = next.h;
        c = next.c;
        total = g.add(total, variance_head_nodes(g, s, h, p.cfg.g));
      }
      return g.sum(total);
    };
    CHECK(grad_check(build, p.params(), 1e-5) < 1e-4);
  }
}

TEST_CASE("advance_variance") {
  SUBCASE("zero recurrent path keeps variance at zero across bins") {
    auto p = random_side(VarianceMode::lstm, 8);
    zero_all(p);
    NodeEmbeddingState st = initial_state(p, 2);
    for (int t = 0; t < 5; ++t) {
      st = advance_variance(st, p);
      CHECK(st.sigma2 == 0.0);
      CHECK(st.current_bin == t + 1);
    }
  }

  SUBCASE("advance is pure: same inputs give the same state") {
    auto p = random_side(VarianceMode::lstm, 9);
    NodeEmbeddingState st = initial_state(p, 0);
    st = advance_variance(st, p);
    NodeEmbeddingState a = advance_variance(st, p);
    NodeEmbeddingState b = advance_variance(st, p);
    CHECK(a.h.data() == b.h.data());
    CHECK(a.c.data() == b.c.data());
    CHECK(a.sigma2 == b.sigma2);
  }

  SUBCASE("cached advance equals a fresh unroll from zeros") {
    auto p = random_side(VarianceMode::lstm, 10);
    StateCache cache;
    cache.reset(p);
    const NodeEmbeddingState& cached = cache.advance_to(1, 3, p, Precision::f64);
    CHECK(cached.sigma2 == variance_at_bin(p, 1, 3));
  }

  SUBCASE("cache refuses to move backwards") {
    auto p = random_side(VarianceMode::lstm, 11);
    StateCache cache;
    cache.reset(p);
    cache.advance_to(0, 2, p, Precision::f64);
    CHECK_THROWS_AS(cache.advance_to(0, 1, p, Precision::f64), StateError);
    CHECK_NOTHROW(cache.advance_to(0, 2, p, Precision::f64));
  }
}

TEST_CASE("variance is non-negative for every g, mode, bin and draw") {
  for (uint64_t seed : {21, 22, 23}) {
    for (GActivation g : {GActivation::relu, GActivation::abs, GActivation::square}) {
      auto fixed = random_side(VarianceMode::fixed, seed, g);
      for (int64_t id = 0; id < fixed.cfg.n_nodes; ++id) CHECK(static_variance(fixed, id) >= 0.0);

      auto dyn = random_side(VarianceMode::lstm, seed + 100, g);
      // widen the weights so the head output actually goes negative pre-g
      for (auto& t : dyn.params())
        for (double& v : t->data()) v *= 30.0;
      for (int64_t id = 0; id < dyn.cfg.n_nodes; ++id)
        for (int64_t bin = 1; bin <= 4; ++bin) CHECK(variance_at_bin(dyn, id, bin) >= 0.0);
    }
  }
}

TEST_CASE("sample_embedding") {
  Tensor mu = Tensor::vec({1.0, 1.0});

  SUBCASE("zero noise returns the mean") {
    CHECK(sample_embedding(mu, 7.3, Tensor::vec({0.0, 0.0}), SampleMode::sample).data() ==
          mu.data());
  }
  SUBCASE("zero variance returns the mean") {
    CHECK(sample_embedding(mu, 0.0, Tensor::vec({2.0, -5.0}), SampleMode::sample).data() ==
          mu.data());
  }
  SUBCASE("unit example") {
    Tensor w = sample_embedding(mu, 4.0, Tensor::vec({1.0, -1.0}), SampleMode::sample);
    CHECK(w.data() == std::vector<double>{3.0, -1.0});
  }
  SUBCASE("mean mode ignores eps") {
    Tensor w = sample_embedding(mu, 4.0, Tensor::vec({1.0, -1.0}), SampleMode::mean);
    CHECK(w.data() == mu.data());
  }
  SUBCASE("negative variance is an upstream invariant breach") {
    CHECK_THROWS_AS(sample_embedding(mu, -1e-9, Tensor::vec({0.0, 0.0}), SampleMode::sample),
                    StateError);
  }
}

TEST_CASE("mean path is independent of every variance-path parameter") {
  auto p = random_side(VarianceMode::lstm, 31);
  std::vector<double> before = mean_embedding(p, 2).data();
  for (auto& [name, t] : p.named_params("side")) {
    if (name == "side.mean") continue;
    for (double& v : t->data()) v += 3.17;
  }
  CHECK(mean_embedding(p, 2).data() == before);
}

TEST_CASE("reparameterized sample gradient matches finite differences") {
  auto p = random_side(VarianceMode::lstm, 33);
  for (double& v : p.var_in->data()) v *= 80.0;
  p.head_b2->at(0) = 0.3;  // keep the variance pre-activation off the relu kink
  std::mt19937_64 rng(34);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor eps({1, p.cfg.dim});
  for (double& v : eps.data()) v = normal(rng);

  // loss = sum(square(w)), w = mean_row + sqrt(sigma2(t=2) + floor) * eps
  auto build = [&](Graph& g, const std::vector<NodeId>&) {
    BoundSide s = bind_side(g, p);
    NodeId x = g.gather_rows(s.var_in, {1});
    NodeId h = g.constant(Tensor({1, p.cfg.lstm_hidden_dim}));
    NodeId c = g.constant(Tensor({1, p.cfg.lstm_hidden_dim}));
    NodeId sigma2 = -1;
    for (int step = 0; step < 2; ++step) {
      LstmNodes next = lstm_step_nodes(g, s, x, h, c);
      h = next.h;
      c = next.c;
      sigma2 = variance_head_nodes(g, s, h, p.cfg.g);
    }
    NodeId sd = g.sqrt(g.add(sigma2, g.constant(Tensor::scalar(1e-12))));
    NodeId w = g.add(g.gather_rows(s.mean, {1}), g.mul(sd, g.constant(eps)));
    return g.sum(g.square(w));
  };
  CHECK(grad_check(build, p.params(), 1e-5) < 1e-4);
}
