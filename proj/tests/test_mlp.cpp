#include <doctest.h>

#include "p1kan/errors.hpp"
#include "p1kan/finite_diff.hpp"
#include "p1kan/mlp.hpp"
#include "test_support.hpp"

using namespace p1kan;
using p1kan::testing::rel_err;

namespace {

std::vector<double> flatten(const MlpNetwork& net) {
  std::vector<double> p;
  for (const auto& layer : net.layers) {
    p.insert(p.end(), layer.weights.data.begin(), layer.weights.data.end());
    p.insert(p.end(), layer.bias.begin(), layer.bias.end());
  }
  return p;
}

void unflatten(MlpNetwork& net, std::span<const double> p) {
  std::size_t q = 0;
  for (auto& layer : net.layers) {
    for (double& v : layer.weights.data) v = p[q++];
    for (double& v : layer.bias) v = p[q++];
  }
}

}  // namespace

TEST_CASE("build_mlp") {
  Rng rng = seed_rng(1);
  const std::vector<std::size_t> two_hidden{2, 40, 40, 1};
  const MlpNetwork net = build_mlp(two_hidden, rng);
  CHECK(net.widths() == two_hidden);
  CHECK(count_params(net) == 2 * 40 + 40 + 40 * 40 + 40 + 40 + 1);
  const double bound = std::sqrt(6.0 / 2.0);
  for (double v : net.layers[0].weights.data) CHECK(std::abs(v) <= bound);
  for (const auto& layer : net.layers) {
    for (double b : layer.bias) CHECK(b == 0.0);
  }

  const std::vector<std::size_t> three_hidden{6, 10, 10, 10, 1};
  CHECK(build_mlp(three_hidden, rng).layers.size() == 4);

  Rng again = seed_rng(1);
  CHECK(build_mlp(two_hidden, again) == net);
}

TEST_CASE("mlp_forward hand examples") {
  Rng rng = seed_rng(2);
  SUBCASE("zero parameters") {
    const std::vector<std::size_t> widths{3, 5, 1};
    MlpNetwork net = build_mlp(widths, rng);
    for (auto& layer : net.layers) std::fill(layer.weights.data.begin(), layer.weights.data.end(), 0.0);
    const Matrix x = sample_uniform_batch(rng, 10, HyperRectangle::unit(3));
    for (double v : mlp_predict(net, x).data) CHECK(v == 0.0);
  }
  SUBCASE("single affine layer") {
    const std::vector<std::size_t> widths{2, 2};
    MlpNetwork net = build_mlp(widths, rng);
    net.layers[0].weights.data = {1.0, 2.0, -3.0, 0.5};
    net.layers[0].bias = {0.25, -1.0};
    Matrix x(1, 2);
    x.data = {2.0, -1.0};
    const Matrix y = mlp_predict(net, x);
    CHECK(y(0, 0) == 0.25);
    CHECK(y(0, 1) == -7.5);
  }
  SUBCASE("ReLU zeroes a negative pre-activation") {
    const std::vector<std::size_t> widths{1, 1, 1};
    MlpNetwork net = build_mlp(widths, rng);
    net.layers[0].weights.data = {-1.0};
    net.layers[1].weights.data = {1.0};
    Matrix x(1, 1, 2.0);
    const auto fwd = mlp_forward(net, x);
    CHECK(fwd.cache.preactivations[0](0, 0) == -2.0);
    CHECK(fwd.cache.inputs[1](0, 0) == 0.0);
    CHECK(fwd.outputs(0, 0) == 0.0);
  }
  SUBCASE("non-finite input") {
    const std::vector<std::size_t> widths{2, 1};
    const MlpNetwork net = build_mlp(widths, rng);
    Matrix x(1, 2, 0.0);
    x(0, 1) = NAN;
    CHECK_THROWS_AS(mlp_predict(net, x), NumericalError);
  }
}

TEST_CASE("positive homogeneity of the first hidden layer") {
  Rng rng = seed_rng(3);
  const std::vector<std::size_t> widths{3, 8, 1};
  MlpNetwork net = build_mlp(widths, rng);
  for (double& b : net.layers[0].bias) b = rng.uniform(-0.5, 0.5);
  MlpNetwork scaled = net;
  for (double& v : scaled.layers[0].weights.data) v *= 2.5;
  for (double& v : scaled.layers[0].bias) v *= 2.5;
  const Matrix x = sample_uniform_batch(rng, 20, HyperRectangle::unit(3));
  const auto a = mlp_forward(net, x);
  const auto b = mlp_forward(scaled, x);
  for (std::size_t q = 0; q < a.cache.inputs[1].data.size(); ++q) {
    CHECK(b.cache.inputs[1].data[q] == doctest::Approx(2.5 * a.cache.inputs[1].data[q]).epsilon(1e-14));
  }
}

TEST_CASE("mlp_backward matches finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = seed_rng(100 + seed);
    const std::vector<std::size_t> widths{2, 4, 1};
    MlpNetwork net = build_mlp(widths, rng);
    for (double& b : net.layers[0].bias) b = rng.uniform(-0.5, 0.5);
    Matrix x;
    MlpForward fwd;
    // keep every hidden pre-activation away from the ReLU kink
    bool near_kink = true;
    while (near_kink) {
      x = sample_uniform_batch(rng, 3, HyperRectangle::unit(2));
      fwd = mlp_forward(net, x);
      near_kink = false;
      for (double z : fwd.cache.preactivations[0].data) near_kink |= std::abs(z) < 1e-3;
    }
    const Matrix target = sample_uniform_batch(rng, 3, HyperRectangle::unit(1));
    for (Backend backend : {Backend::parallel, Backend::reference}) {
      const auto grads = mlp_backward(net, fwd.cache, testing::mse_grad(fwd.outputs, target), backend);
      std::vector<double> analytic;
      for (const auto& g : grads) {
        analytic.insert(analytic.end(), g.weights.data.begin(), g.weights.data.end());
        analytic.insert(analytic.end(), g.bias.begin(), g.bias.end());
      }
      MlpNetwork probe = net;
      const auto numeric = finite_diff_grad(
          [&](std::span<const double> p) {
            unflatten(probe, p);
            return testing::mse(mlp_predict(probe, x), target);
          },
          flatten(net));
      for (std::size_t q = 0; q < analytic.size(); ++q) CHECK(rel_err(analytic[q], numeric[q]) <= 1e-6);
    }
  }
}

TEST_CASE("mlp_backward degenerate cases") {
  Rng rng = seed_rng(7);
  const std::vector<std::size_t> widths{2, 3, 1};
  MlpNetwork net = build_mlp(widths, rng);
  const Matrix x = sample_uniform_batch(rng, 6, HyperRectangle::unit(2));

  SUBCASE("zero upstream gradient") {
    const auto fwd = mlp_forward(net, x);
    for (const auto& g : mlp_backward(net, fwd.cache, Matrix(6, 1, 0.0))) {
      for (double v : g.weights.data) CHECK(v == 0.0);
      for (double v : g.bias) CHECK(v == 0.0);
    }
  }
  SUBCASE("dead unit receives no gradient") {
    // unit 1 sees negative inputs only on [0,1]^2
    net.layers[0].weights(1, 0) = -1.0;
    net.layers[0].weights(1, 1) = -1.0;
    net.layers[0].bias[1] = -0.1;
    const auto fwd = mlp_forward(net, x);
    Matrix up(6, 1);
    for (double& v : up.data) v = rng.uniform(-1.0, 1.0);
    const auto g = mlp_backward(net, fwd.cache, up);
    CHECK(g[0].weights(1, 0) == 0.0);
    CHECK(g[0].weights(1, 1) == 0.0);
    CHECK(g[0].bias[1] == 0.0);
  }
  SUBCASE("cache mismatch") {
    auto fwd = mlp_forward(net, x);
    CHECK_THROWS_AS(mlp_backward(net, fwd.cache, Matrix(5, 1)), ShapeError);
    fwd.cache.inputs.pop_back();
    CHECK_THROWS_AS(mlp_backward(net, fwd.cache, Matrix(6, 1)), ShapeError);
  }
}

TEST_CASE("parallel MLP results do not depend on buffer addresses") {
  Rng rng = seed_rng(31);
  const std::vector<std::size_t> widths{2, 37, 19, 1};
  const MlpNetwork net = build_mlp(widths, rng);
  const Matrix x = sample_uniform_batch(rng, 257, HyperRectangle::unit(2));
  const Matrix g = sample_uniform_batch(rng, 257, HyperRectangle::unit(1));
  const auto ref_fwd = mlp_forward(net, x);
  const auto ref_grads = mlp_backward(net, ref_fwd.cache, g);

  // Pad the heap by a varying number of doubles so copies land at
  // different alignments.
  std::vector<std::vector<double>> padding;
  for (std::size_t shift = 1; shift <= 16; ++shift) {
    padding.emplace_back(shift);
    const MlpNetwork net_copy = net;
    padding.emplace_back(shift + 3);
    const Matrix x_copy = x;
    const Matrix g_copy = g;
    const auto fwd = mlp_forward(net_copy, x_copy);
    CHECK(fwd.outputs == ref_fwd.outputs);
    const auto grads = mlp_backward(net_copy, fwd.cache, g_copy);
    for (std::size_t l = 0; l < grads.size(); ++l) {
      CHECK(grads[l].weights == ref_grads[l].weights);
      CHECK(grads[l].bias == ref_grads[l].bias);
    }
  }
}
