#include <doctest.h>
#include <omp.h>

#include "p1kan/mlp.hpp"
#include "p1kan/network.hpp"
#include "test_support.hpp"

using namespace p1kan;

namespace {

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t q = 0; q < a.size(); ++q) {
    CHECK(std::abs(a[q] - b[q]) <= tol * std::max(1.0, std::abs(b[q])));
  }
}

}  // namespace

TEST_CASE("parallel layer kernels agree with the reference") {
  Rng rng = seed_rng(50);
  for (int trial = 0; trial < 12; ++trial) {
    const P1KanLayer layer = testing::random_layer(1 + trial % 5, 1 + trial % 4, 1 + trial % 9, rng, 2.0);
    const HyperRectangle support(std::vector<double>(layer.d0, -0.5), std::vector<double>(layer.d0, 1.5));
    const Matrix x = sample_uniform_batch(rng, 700, support);
    const auto fwd = layer_forward(layer, support, x);
    check_close(fwd.outputs.data, reference::layer_apply(layer, support, x).data, 1e-13);

    Matrix up(x.rows, layer.d1);
    for (double& v : up.data) v = rng.uniform(-1.0, 1.0);
    const auto fast = layer_backward(layer, fwd.cache, up);
    const auto slow = reference::layer_backward(layer, support, x, up);
    check_close(fast.coeffs, slow.coeffs, 1e-12);
    check_close(fast.logits.data, slow.logits.data, 1e-10);
    check_close(fast.inputs.data, slow.inputs.data, 1e-11);
    check_close(fast.support_lower, slow.support_lower, 1e-10);
    check_close(fast.support_upper, slow.support_upper, 1e-10);
  }
}

TEST_CASE("network backends agree") {
  Rng rng = seed_rng(51);
  const P1KanNetwork net = testing::random_network({3, 6, 5, 1}, 7, rng);
  const Matrix x = sample_uniform_batch(rng, 300, net.domain);
  check_close(network_predict(net, x).data, network_predict(net, x, Backend::reference).data, 1e-12);
  const auto fwd = network_forward(net, x);
  Matrix up(300, 1);
  for (double& v : up.data) v = rng.uniform(-1.0, 1.0);
  const auto fast = network_backward(net, fwd, up);
  const auto slow = network_backward(net, fwd, up, Backend::reference);
  for (std::size_t l = 0; l < fast.size(); ++l) {
    check_close(fast[l].coeffs, slow[l].coeffs, 1e-10);
    check_close(fast[l].logits.data, slow[l].logits.data, 1e-9);
  }
}

TEST_CASE("MLP backends agree") {
  Rng rng = seed_rng(52);
  const std::vector<std::size_t> widths{4, 40, 40, 40, 1};
  MlpNetwork net = build_mlp(widths, rng);
  for (auto& layer : net.layers) {
    for (double& b : layer.bias) b = rng.uniform(-0.2, 0.2);
  }
  const Matrix x = sample_uniform_batch(rng, 333, HyperRectangle::unit(4));
  const auto fast = mlp_forward(net, x);
  const auto slow = mlp_forward(net, x, Backend::reference);
  check_close(fast.outputs.data, slow.outputs.data, 1e-12);
  Matrix up(333, 1);
  for (double& v : up.data) v = rng.uniform(-1.0, 1.0);
  const auto gf = mlp_backward(net, fast.cache, up);
  const auto gs = mlp_backward(net, slow.cache, up, Backend::reference);
  for (std::size_t l = 0; l < gf.size(); ++l) {
    check_close(gf[l].weights.data, gs[l].weights.data, 1e-11);
    check_close(gf[l].bias, gs[l].bias, 1e-11);
  }
}

TEST_CASE("parallel results do not depend on the thread count") {
  Rng rng = seed_rng(53);
  const P1KanNetwork net = testing::random_network({2, 10, 10, 1}, 20, rng);
  const Matrix x = sample_uniform_batch(rng, 1000, net.domain);
  Matrix up(1000, 1);
  for (double& v : up.data) v = rng.uniform(-1.0, 1.0);

  auto run = [&](int threads) {
    omp_set_num_threads(threads);
    const auto fwd = network_forward(net, x);
    return std::make_pair(fwd.outputs, network_backward(net, fwd, up));
  };
  const auto one = run(1);
  const auto four = run(4);
  const auto seven = run(7);
  CHECK(one.first == four.first);
  for (std::size_t l = 0; l < one.second.size(); ++l) {
    CHECK(one.second[l].coeffs == four.second[l].coeffs);
    CHECK(one.second[l].logits == four.second[l].logits);
    CHECK(one.second[l].coeffs == seven.second[l].coeffs);
  }
  omp_set_num_threads(omp_get_num_procs());
}
