// Times the OpenMP kernels against the serial reference implementations.
//
//   bench_kernels [batch] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "p1kan/layer.hpp"
#include "p1kan/mlp.hpp"
#include "p1kan/network.hpp"
#include "p1kan/rng.hpp"

using namespace p1kan;

namespace {

double seconds_per_call(const std::function<void()>& fn, int repeats) {
  fn();  // warm-up
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / repeats;
}

void report(const std::string& name, double parallel, double reference) {
  std::printf("%-34s %12.3f %12.3f %9.1fx\n", name.c_str(), parallel * 1e3, reference * 1e3, reference / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t batch = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 20;
  std::printf("batch %zu, %d repeats, %d OpenMP threads\n", batch, repeats, omp_get_max_threads());
  std::printf("%-34s %12s %12s %10s\n", "kernel", "parallel ms", "serial ms", "speedup");

  Rng rng = seed_rng(1);

  {
    const std::size_t d0 = 10, d1 = 10, m = 20;
    const P1KanLayer layer = new_layer(d0, d1, m, rng);
    const HyperRectangle support = HyperRectangle::unit(d0);
    const Matrix x = sample_uniform_batch(rng, batch, support);
    const Matrix g = sample_uniform_batch(rng, batch, HyperRectangle::unit(d1));
    const auto fwd = layer_forward(layer, support, x);
    report("layer 10->10 M=20 forward",
           seconds_per_call([&] { layer_apply(layer, support, x); }, repeats),
           seconds_per_call([&] { reference::layer_apply(layer, support, x); }, repeats));
    report("layer 10->10 M=20 backward",
           seconds_per_call([&] { layer_backward(layer, fwd.cache, g); }, repeats),
           seconds_per_call([&] { reference::layer_backward(layer, support, x, g); }, repeats));
  }

  {
    const std::size_t widths[] = {2, 10, 10, 1};
    const P1KanNetwork net = build_network(widths, 20, HyperRectangle::unit(2), rng);
    const Matrix x = sample_uniform_batch(rng, batch, net.domain);
    const Matrix g = sample_uniform_batch(rng, batch, HyperRectangle::unit(1));
    const auto fwd = network_forward(net, x);
    report("P1-KAN [2,10,10,1] M=20 predict",
           seconds_per_call([&] { network_predict(net, x, Backend::parallel); }, repeats),
           seconds_per_call([&] { network_predict(net, x, Backend::reference); }, repeats));
    report("P1-KAN [2,10,10,1] M=20 backward",
           seconds_per_call([&] { network_backward(net, fwd, g, Backend::parallel); }, repeats),
           seconds_per_call([&] { network_backward(net, fwd, g, Backend::reference); }, repeats));
  }

  {
    const std::size_t widths[] = {2, 160, 160, 160, 1};
    const MlpNetwork net = build_mlp(widths, rng);
    const Matrix x = sample_uniform_batch(rng, batch, HyperRectangle::unit(2));
    const Matrix g = sample_uniform_batch(rng, batch, HyperRectangle::unit(1));
    const auto fwd = mlp_forward(net, x);
    report("MLP [2,160,160,160,1] forward",
           seconds_per_call([&] { mlp_forward(net, x, Backend::parallel); }, repeats),
           seconds_per_call([&] { mlp_forward(net, x, Backend::reference); }, repeats));
    report("MLP [2,160,160,160,1] backward",
           seconds_per_call([&] { mlp_backward(net, fwd.cache, g, Backend::parallel); }, repeats),
           seconds_per_call([&] { mlp_backward(net, fwd.cache, g, Backend::reference); }, repeats));
  }
  return 0;
}
