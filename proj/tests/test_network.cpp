#include <sstream>

#include "doctest.h"
#include "test_util.hpp"

using namespace relumip;
using namespace testutil;

TEST_CASE("load: single identity layer") {
  const auto net = parse_net(
      R"({"input_dim": 1, "layers": [{"weights": [[1.0]], "biases": [0.0], "activation": "relu"}]})");
  CHECK(net.input_dim == 1);
  CHECK(net.depth() == 1);
  CHECK(net.output_dim() == 1);
  CHECK(net.layers[0].activation == Activation::ReLU);
}

TEST_CASE("load: dimension mismatch names the offending layer") {
  const std::string doc = R"({"input_dim": 2, "layers": [
    {"weights": [[1, 0], [0, 1]], "biases": [0, 0], "activation": "relu"},
    {"weights": [[1, 0, 0]], "biases": [0], "activation": "relu"}]})";
  try {
    parse_net(doc);
    FAIL("expected a dimension mismatch");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("layer 2") != std::string::npos);
  }
}

TEST_CASE("load: bias length mismatch is reported") {
  const std::string doc = R"({"input_dim": 1, "layers": [
    {"weights": [[1.0]], "biases": [0.0, 1.0], "activation": "relu"}]})";
  CHECK_THROWS_AS(parse_net(doc), std::invalid_argument);
}

TEST_CASE("load: overflowing literal is rejected") {
  const std::string doc = R"({"input_dim": 1, "layers": [
    {"weights": [[1e999]], "biases": [0.0], "activation": "relu"}]})";
  CHECK_THROWS_AS(parse_net(doc), std::invalid_argument);
}

TEST_CASE("validate: non-finite entry is reported with its layer") {
  Networkd net = scalar_net(1.0, 0.0);
  net.layers[0].biases(0) = std::numeric_limits<double>::quiet_NaN();
  try {
    net.validate();
    FAIL("expected a non-finite rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}

TEST_CASE("load/save round trip on an APS-shaped network") {
  const Networkd net = make_random_network({74, 8, 8, 1}, 21);
  std::stringstream buf;
  save_network(net, buf);
  const Networkd again = load_network(buf);
  REQUIRE(again.depth() == net.depth());
  CHECK(again.input_dim == 74);
  for (Eigen::Index k = 0; k < net.depth(); ++k) {
    CHECK(again.layers[static_cast<std::size_t>(k)].weights ==
          net.layers[static_cast<std::size_t>(k)].weights);
    CHECK(again.layers[static_cast<std::size_t>(k)].biases ==
          net.layers[static_cast<std::size_t>(k)].biases);
  }
}

TEST_CASE("forward: scalar cases") {
  const auto relu = scalar_net(1.0, 0.0);
  CHECK(forward(relu, Eigen::VectorXd::Constant(1, -3.0))(0) == 0.0);
  const auto affine = scalar_net(2.0, 1.0);
  CHECK(forward(affine, Eigen::VectorXd::Constant(1, 2.0))(0) == 5.0);
}

TEST_CASE("forward: dimension mismatch throws") {
  const auto net = scalar_net(1.0, 0.0);
  CHECK_THROWS_AS(forward(net, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("forward matches an independent scalar-loop evaluator") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Networkd net = make_random_network({2, 3, 2}, 100 + trial);
    Eigen::VectorXd x(2);
    x << dist(rng), dist(rng);
    const Eigen::VectorXd a = forward(net, x);
    const Eigen::VectorXd b = loop_eval(net, x);
    REQUIRE(a.size() == b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
      CHECK(std::abs(a(i) - b(i)) <= 1e-12);
  }
}

TEST_CASE("activation pattern: sign convention at zero") {
  const auto net = scalar_net(1.0, 0.0);
  CHECK(activation_pattern(net, Eigen::VectorXd::Constant(1, -3.0)) ==
        std::vector<std::uint8_t>{1});
  CHECK(activation_pattern(net, Eigen::VectorXd::Constant(1, 0.0)) ==
        std::vector<std::uint8_t>{0});
}

TEST_CASE("activation pattern agrees with hand-computed pre-activations") {
  // Layer 1: [x0 - x1 + 1, -2 x0 + 0.5]; layer 2: [x0 + x1 - 2].
  Networkd net;
  net.input_dim = 2;
  Layerd l1, l2;
  l1.weights.resize(2, 2);
  l1.weights << 1, -1, -2, 0;
  l1.biases.resize(2);
  l1.biases << 1, 0.5;
  l2.weights.resize(1, 2);
  l2.weights << 1, 1;
  l2.biases.resize(1);
  l2.biases << -2;
  net.layers = {l1, l2};
  net.validate();

  Eigen::VectorXd x(2);
  x << 1.0, 3.0;
  // pre1 = (1 - 3 + 1, -2 + 0.5) = (-1, -1.5): both inactive.
  // post1 = (0, 0); pre2 = 0 + 0 - 2 = -2: inactive.
  CHECK(activation_pattern(net, x) == std::vector<std::uint8_t>{1, 1, 1});

  x << -1.0, -1.0;
  // pre1 = (-1 + 1 + 1, 2 + 0.5) = (1, 2.5): both active.
  // pre2 = 1 + 2.5 - 2 = 1.5: active.
  CHECK(activation_pattern(net, x) == std::vector<std::uint8_t>{0, 0, 0});
}

TEST_CASE("interval bounds: scalar layers") {
  IntervalBoxd box;
  box.lo = Eigen::VectorXd::Constant(1, -1.0);
  box.hi = Eigen::VectorXd::Constant(1, 2.0);
  const auto id = interval_bounds(scalar_net(1.0, 0.0), box);
  CHECK(id[0].pre_lo(0) == -1.0);
  CHECK(id[0].pre_hi(0) == 2.0);

  IntervalBoxd box2;
  box2.lo = Eigen::VectorXd::Constant(1, 0.0);
  box2.hi = Eigen::VectorXd::Constant(1, 3.0);
  const auto flip = interval_bounds(scalar_net(-1.0, 1.0), box2);
  CHECK(flip[0].pre_lo(0) == -2.0);
  CHECK(flip[0].pre_hi(0) == 1.0);
}

TEST_CASE("interval bounds contain sampled pre-activations") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const Networkd net = make_random_network({2, 4, 2}, 500 + trial);
    IntervalBoxd box;
    box.lo = Eigen::VectorXd::Constant(2, -1.5);
    box.hi = Eigen::VectorXd::Constant(2, 2.5);
    const auto bounds = interval_bounds(net, box);
    std::uniform_real_distribution<double> dist(-1.5, 2.5);
    for (int s = 0; s < 1000; ++s) {
      Eigen::VectorXd x(2);
      x << dist(rng), dist(rng);
      const auto trace = forward_trace(net, x);
      for (std::size_t k = 0; k < trace.pre.size(); ++k)
        for (Eigen::Index i = 0; i < trace.pre[k].size(); ++i) {
          CHECK(trace.pre[k](i) >= bounds[k].pre_lo(i) - 1e-12);
          CHECK(trace.pre[k](i) <= bounds[k].pre_hi(i) + 1e-12);
        }
    }
  }
}

TEST_CASE("forward scale consistency: doubling the final layer doubles outputs") {
  Networkd net = make_random_network({3, 4, 2}, 42);
  Eigen::VectorXd x(3);
  x << 0.3, -0.7, 1.1;
  const Eigen::VectorXd base = forward(net, x);
  net.layers.back().weights *= 2.0;
  net.layers.back().biases *= 2.0;
  const Eigen::VectorXd doubled = forward(net, x);
  for (Eigen::Index i = 0; i < base.size(); ++i)
    CHECK(doubled(i) == 2.0 * base(i));  // exact: scaling by 2 commutes with rounding
}

TEST_CASE("validate: degenerate shapes") {
  CHECK_THROWS(make_random_network({0, 1}, 1));
  CHECK_THROWS(make_random_network({1}, 1));
  Networkd net;
  net.input_dim = 1;
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
}

TEST_CASE("random fixture generation is reproducible") {
  const Networkd a = make_random_network({3, 5, 2}, 9, Activation::Linear);
  const Networkd b = make_random_network({3, 5, 2}, 9, Activation::Linear);
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    CHECK(a.layers[k].weights == b.layers[k].weights);
    CHECK(a.layers[k].biases == b.layers[k].biases);
  }
  CHECK(a.layers.back().activation == Activation::Linear);
}
