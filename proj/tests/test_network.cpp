#include <doctest.h>

#include <cmath>
#include <cstring>

#include "nullforge/network.hpp"
#include "nullforge/network_json.hpp"
#include "nullforge/rng.hpp"

using namespace nullforge;

namespace {

MlpNetwork random_net(Activation act, const std::vector<int>& dims, Rng& rng, double scale = 1.0) {
  std::vector<std::vector<double>> W, B;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    std::vector<double> w(static_cast<std::size_t>(dims[i + 1]) * dims[i]), b(dims[i + 1]);
    for (auto& x : w) x = scale * rng.normal();
    for (auto& x : b) x = scale * rng.normal();
    W.push_back(std::move(w));
    B.push_back(std::move(b));
  }
  return MlpNetwork(act, dims, std::move(W), std::move(B));
}

}  // namespace

TEST_CASE("constant network returns its output bias") {
  const MlpNetwork net(Activation(ActivationKind::ReLU), {1, 2, 1},
                       {{0.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {3.25}});
  CHECK(net.forward(0.0) == 3.25);
  CHECK(net.forward(-7.5) == 3.25);
}

TEST_CASE("single-kink evaluation") {
  const MlpNetwork net(Activation(ActivationKind::ReLU), {1, 1, 1}, {{1.0}, {1.0}},
                       {{-0.5}, {0.0}});
  CHECK(net.forward(1.0) == 0.5);
  CHECK(net.forward(0.25) == 0.0);
}

TEST_CASE("one-neuron boundary family hits the right endpoint value") {
  // u(z) = (uT - u0)/(T + b) sigma(z + b) + u0 with u0=0, uT=1, T=1, b=-0.9
  const double b = -0.9, T = 1.0, u0 = 0.0, uT = 1.0;
  const MlpNetwork net(Activation(ActivationKind::ReLU), {1, 1, 1},
                       {{1.0}, {(uT - u0) / (T + b)}}, {{b}, {u0}});
  CHECK(net.forward(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(net.forward(0.0) == 0.0);
  CHECK(net.forward(0.5) == 0.0);  // left of the kink
}

TEST_CASE("parameter count matches the layer sum") {
  Rng rng(7);
  const MlpNetwork net = random_net(Activation(ActivationKind::Tanh), {3, 5, 4, 1}, rng);
  CHECK(net.parameter_count() == (5 * 3 + 5) + (4 * 5 + 4) + (1 * 4 + 1));
}

TEST_CASE("forward rejects dimension mismatch") {
  Rng rng(8);
  const MlpNetwork net = random_net(Activation(ActivationKind::Tanh), {2, 3, 1}, rng);
  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(net.forward(std::span<const double>(bad)), std::invalid_argument);
}

TEST_CASE("linear_combine: identity combination") {
  Rng rng(11);
  const MlpNetwork u = random_net(Activation(ActivationKind::Tanh), {1, 3, 1}, rng);
  const MlpNetwork c = linear_combine({u}, {1.0});
  for (int i = 0; i < 100; ++i) {
    const double z = rng.uniform(-2.0, 2.0);
    CHECK(std::abs(c.forward(z) - u.forward(z)) <= 1e-14);
  }
}

TEST_CASE("linear_combine: cancellation") {
  Rng rng(12);
  const MlpNetwork u = random_net(Activation(ActivationKind::Tanh), {1, 4, 1}, rng);
  const MlpNetwork c = linear_combine({u, u}, {1.0, -1.0});
  for (int i = 0; i < 100; ++i) {
    const double z = rng.uniform(-2.0, 2.0);
    CHECK(std::abs(c.forward(z)) <= 1e-13);
  }
}

TEST_CASE("linear_combine: widths add and the count formula holds") {
  Rng rng(13);
  for (int d : {1, 2, 3}) {
    const MlpNetwork a = random_net(Activation(ActivationKind::ReLU), {d, 3, 1}, rng);
    const MlpNetwork b = random_net(Activation(ActivationKind::ReLU), {d, 3, 1}, rng);
    const MlpNetwork c = linear_combine({a, b}, {2.0, -0.5});
    CHECK(c.layer_dims() == std::vector<int>{d, 6, 1});
    CHECK(c.parameter_count() == (d + 1) * 6 + 7);
  }
  // a pair with hidden sizes l and l+1
  const int l = 4, d = 2;
  const MlpNetwork a = random_net(Activation(ActivationKind::ReLU), {d, l, 1}, rng);
  const MlpNetwork b = random_net(Activation(ActivationKind::ReLU), {d, l + 1, 1}, rng);
  const MlpNetwork c = linear_combine({a, b}, {1.0, 1.0});
  CHECK(c.parameter_count() == (d + 1) * (2 * l + 1) + (2 * l + 2));
}

TEST_CASE("linear_combine: weighted sum equality on random points") {
  Rng rng(14);
  const MlpNetwork a = random_net(Activation(ActivationKind::Tanh), {2, 3, 4, 1}, rng);
  const MlpNetwork b = random_net(Activation(ActivationKind::Tanh), {2, 2, 5, 1}, rng);
  const MlpNetwork c = linear_combine({a, b}, {1.5, -2.25});
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double want = 1.5 * a.forward(x) - 2.25 * b.forward(x);
    CHECK(c.forward(x) == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("linear_combine rejects mismatches") {
  Rng rng(15);
  const MlpNetwork a = random_net(Activation(ActivationKind::Tanh), {1, 3, 1}, rng);
  const MlpNetwork b = random_net(Activation(ActivationKind::Tanh), {1, 3, 3, 1}, rng);
  const MlpNetwork c = random_net(Activation(ActivationKind::ReLU), {1, 3, 1}, rng);
  CHECK_THROWS_AS(linear_combine({a, b}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(linear_combine({a, c}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(linear_combine({}, {}), std::invalid_argument);
}

TEST_CASE("extend_depth_identity: exact for ReLU") {
  Rng rng(16);
  const MlpNetwork net = random_net(Activation(ActivationKind::ReLU), {2, 4, 1}, rng);
  const MlpNetwork deep = extend_depth_identity(net, 4);
  CHECK(deep.depth() == 4);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    CHECK(deep.forward(x) == net.forward(x));
  }
}

TEST_CASE("extend_depth_identity: no-op at equal depth") {
  Rng rng(17);
  const MlpNetwork net = random_net(Activation(ActivationKind::ReLU), {1, 3, 1}, rng);
  const MlpNetwork same = extend_depth_identity(net, net.depth());
  CHECK(same.layer_dims() == net.layer_dims());
  CHECK_THROWS_AS(extend_depth_identity(net, 1), std::invalid_argument);
}

TEST_CASE("extend_depth_identity: smooth near-identity within 1e-10 on the box") {
  Rng rng(18);
  for (int d : {1, 2}) {
    const MlpNetwork net =
        random_net(Activation(ActivationKind::Tanh), {d, 4, 1}, rng, 0.7);
    const MlpNetwork deep = extend_depth_identity(net, 3);
    CHECK(deep.depth() == 3);
    double max_diff = 0.0;
    for (int i = 0; i < 500; ++i) {
      std::vector<double> x(d);
      for (auto& c : x) c = rng.uniform(-1.0, 1.0);
      max_diff = std::max(max_diff, std::abs(deep.forward(x) - net.forward(x)));
    }
    CHECK(max_diff <= 1e-10);
  }
}

TEST_CASE("is_smooth_at") {
  Rng rng(19);
  const MlpNetwork smooth = random_net(Activation(ActivationKind::Tanh), {1, 3, 1}, rng);
  CHECK(is_smooth_at(smooth, std::vector<double>{0.123}));
  const MlpNetwork kink(Activation(ActivationKind::ReLU), {1, 1, 1}, {{1.0}, {1.0}},
                        {{0.0}, {0.0}});
  CHECK_FALSE(is_smooth_at(kink, std::vector<double>{0.0}));
  const MlpNetwork shifted(Activation(ActivationKind::ReLU), {1, 1, 1}, {{1.0}, {1.0}},
                           {{-0.5}, {0.0}});
  CHECK(is_smooth_at(shifted, std::vector<double>{0.4}, 1e-3));  // preactivation -0.1
}

TEST_CASE("network JSON round-trip is bit-exact") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const MlpNetwork net = random_net(
        trial % 2 ? Activation(ActivationKind::Tanh) : Activation(ActivationKind::ReLU),
        {2, 3, 2, 1}, rng, std::pow(10.0, rng.uniform(-8, 8)));
    const MlpNetwork back = network_from_string(network_to_string(net));
    REQUIRE(back.layer_dims() == net.layer_dims());
    CHECK(back.activation().kind() == net.activation().kind());
    for (int l = 0; l < net.depth(); ++l) {
      for (std::size_t i = 0; i < net.weights(l).size(); ++i) {
        CHECK(std::memcmp(&back.weights(l)[i], &net.weights(l)[i], sizeof(double)) == 0);
      }
      for (std::size_t i = 0; i < net.biases(l).size(); ++i) {
        CHECK(std::memcmp(&back.biases(l)[i], &net.biases(l)[i], sizeof(double)) == 0);
      }
    }
  }
}
