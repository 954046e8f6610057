#include <doctest.h>

#include "p1kan/errors.hpp"
#include "p1kan/finite_diff.hpp"
#include "p1kan/network.hpp"
#include "test_support.hpp"

using namespace p1kan;
using p1kan::testing::rel_err;

namespace {

std::vector<std::size_t> w(std::initializer_list<std::size_t> v) { return v; }

}  // namespace

TEST_CASE("build_network") {
  Rng rng = seed_rng(1);
  const auto widths = w({2, 10, 10, 1});
  const P1KanNetwork net = build_network(widths, 5, HyperRectangle::unit(2), rng);
  REQUIRE(net.layers.size() == 3);
  CHECK(net.layers[0].d0 == 2);
  CHECK(net.layers[0].d1 == 10);
  CHECK(net.layers[1].d0 == 10);
  CHECK(net.layers[1].d1 == 10);
  CHECK(net.layers[2].d0 == 10);
  CHECK(net.layers[2].d1 == 1);
  CHECK(net.widths() == widths);

  Rng again = seed_rng(1);
  CHECK(build_network(widths, 5, HyperRectangle::unit(2), again) == net);

  const auto minimal = w({1, 1});
  const P1KanNetwork tiny = build_network(minimal, 1, HyperRectangle::unit(1), rng);
  CHECK(tiny.layers.size() == 1);
  CHECK(count_params(tiny) == 3);

  CHECK_THROWS_AS(build_network(widths, 5, HyperRectangle::unit(3), rng), ShapeError);
  const auto lone = w({2});
  CHECK_THROWS_AS(build_network(lone, 5, HyperRectangle::unit(2), rng), ShapeError);
}

TEST_CASE("count_params") {
  Rng rng = seed_rng(2);
  const auto widths = w({2, 10, 1});
  P1KanNetwork net = build_network(widths, 5, HyperRectangle::unit(2), rng);
  CHECK(count_params(net) == 240);
  for (auto& layer : net.layers) {
    for (double& a : layer.coeffs) a = 7.0;
  }
  CHECK(count_params(net) == 240);
}

TEST_CASE("single-layer network equals layer_forward on the domain") {
  Rng rng = seed_rng(3);
  const P1KanNetwork net = testing::random_network({3, 2}, 4, rng);
  const Matrix x = sample_uniform_batch(rng, 100, net.domain);
  const auto fwd = network_forward(net, x);
  CHECK(fwd.outputs == layer_forward(net.layers[0], net.domain, x).outputs);
}

TEST_CASE("zero network") {
  Rng rng = seed_rng(4);
  const auto widths = w({2, 4, 3, 1});
  const P1KanNetwork net = build_network(widths, 3, HyperRectangle::unit(2), rng, 0.0);
  const Matrix x = sample_uniform_batch(rng, 50, net.domain);
  const auto fwd = network_forward(net, x);
  for (double v : fwd.outputs.data) CHECK(v == 0.0);
  for (std::size_t l = 1; l < fwd.supports.size(); ++l) {
    for (std::size_t k = 0; k < fwd.supports[l].dim(); ++k) {
      CHECK(fwd.widened[l][k]);
      CHECK(fwd.supports[l].width(k) == doctest::Approx(kLatticeEpsilon));
    }
  }
}

TEST_CASE("activations stay inside their supports and composition matches") {
  Rng rng = seed_rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const P1KanNetwork net = testing::random_network({3, 5, 4, 2}, 1 + trial % 6, rng);
    const Matrix x = sample_uniform_batch(rng, 1000, net.domain);
    const auto fwd = network_forward(net, x);

    Matrix current = x;
    HyperRectangle support = net.domain;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      CHECK(fwd.supports[l] == support);
      const auto& in = fwd.caches[l].inputs;
      for (std::size_t s = 0; s < in.rows; ++s) REQUIRE(support.contains(in.row(s), 1e-12));
      current = layer_apply(net.layers[l], support, current, l == 0 ? InputPolicy::clamp : InputPolicy::strict);
      support = widen_degenerate(output_lattice(net.layers[l]), kLatticeEpsilon);
    }
    CHECK(current == fwd.outputs);
    CHECK(network_predict(net, x) == fwd.outputs);
  }
}

namespace {

double network_loss(const P1KanNetwork& net, const Matrix& x, const Matrix& target) {
  return testing::mse(network_predict(net, x), target);
}

void check_network_gradient(const std::vector<std::size_t>& widths, std::size_t m, std::uint64_t seed) {
  Rng rng = seed_rng(seed);
  P1KanNetwork net = testing::random_network(widths, m, rng);
  Matrix x;
  NetworkForward fwd;
  do {
    x = sample_uniform_batch(rng, 5, net.domain);
    fwd = network_forward(net, x);
  } while (testing::min_knot_distance(fwd) < 1e-3);
  const Matrix target = sample_uniform_batch(rng, 5, HyperRectangle(std::vector<double>(widths.back(), -1.0),
                                                                     std::vector<double>(widths.back(), 1.0)));
  const auto grads = network_backward(net, fwd, testing::mse_grad(fwd.outputs, target));

  std::vector<double> analytic;
  for (const auto& g : grads) {
    analytic.insert(analytic.end(), g.coeffs.begin(), g.coeffs.end());
    analytic.insert(analytic.end(), g.logits.data.begin(), g.logits.data.end());
  }
  P1KanNetwork probe = net;
  const auto numeric = finite_diff_grad(
      [&](std::span<const double> p) {
        testing::unflatten(probe, p);
        return network_loss(probe, x, target);
      },
      testing::flatten(net));
  REQUIRE(analytic.size() == numeric.size());
  for (std::size_t q = 0; q < analytic.size(); ++q) {
    INFO("coordinate " << q << " analytic " << analytic[q] << " numeric " << numeric[q]);
    CHECK(rel_err(analytic[q], numeric[q]) <= 1e-5);
  }
}

}  // namespace

TEST_CASE("network_backward matches finite differences") {
  check_network_gradient({2, 3, 1}, 3, 31);
  check_network_gradient({2, 3, 1}, 3, 32);
  check_network_gradient({3, 5, 5, 2}, 4, 33);
  check_network_gradient({1, 2, 2, 1}, 2, 34);
}

TEST_CASE("network_backward degenerate cases") {
  Rng rng = seed_rng(40);
  const P1KanNetwork net = testing::random_network({2, 3, 1}, 3, rng);
  const Matrix x = sample_uniform_batch(rng, 4, net.domain);
  const auto fwd = network_forward(net, x);

  SUBCASE("zero upstream gradient") {
    for (const auto& g : network_backward(net, fwd, Matrix(4, 1, 0.0))) {
      for (double v : g.coeffs) CHECK(v == 0.0);
      for (double v : g.logits.data) CHECK(v == 0.0);
    }
  }
  SUBCASE("a duplicated sample doubles its contribution") {
    Matrix one(1, 2);
    one(0, 0) = x(0, 0);
    one(0, 1) = x(0, 1);
    Matrix two(2, 2);
    two.data = {x(0, 0), x(0, 1), x(0, 0), x(0, 1)};
    const auto g1 = network_backward(net, network_forward(net, one), Matrix(1, 1, 1.0));
    const auto g2 = network_backward(net, network_forward(net, two), Matrix(2, 1, 1.0));
    for (std::size_t l = 0; l < g1.size(); ++l) {
      for (std::size_t q = 0; q < g1[l].coeffs.size(); ++q) {
        CHECK(g2[l].coeffs[q] == doctest::Approx(2.0 * g1[l].coeffs[q]).epsilon(1e-14));
      }
      for (std::size_t q = 0; q < g1[l].logits.data.size(); ++q) {
        CHECK(g2[l].logits.data[q] == doctest::Approx(2.0 * g1[l].logits.data[q]).epsilon(1e-14));
      }
    }
  }
  SUBCASE("mismatched forward record") {
    NetworkForward broken = fwd;
    broken.caches.pop_back();
    CHECK_THROWS_AS(network_backward(net, broken, Matrix(4, 1)), ShapeError);
  }
}

TEST_CASE("width mismatch is detected") {
  Rng rng = seed_rng(41);
  P1KanNetwork net = testing::random_network({2, 3, 1}, 3, rng);
  net.layers[1] = new_layer(4, 1, 3, rng);
  CHECK_THROWS_AS(validate_network(net), ShapeError);
}
