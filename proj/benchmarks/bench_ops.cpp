#include <benchmark/benchmark.h>

#include "disk/ops.hpp"
#include "disk/rng.hpp"

using namespace disk;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, bool grad = false) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = n(rng);
  Tensor t = Tensor::from(std::move(shape), std::move(v));
  t.set_requires_grad(grad);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({n, n}, 1);
  const Tensor b = random_tensor({n, n}, 2);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(ops::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_SoftmaxRows(benchmark::State& state) {
  const Tensor x = random_tensor({4, 128, static_cast<std::size_t>(state.range(0))}, 3);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(ops::softmax(x, -1));
}
BENCHMARK(BM_SoftmaxRows)->Arg(1024)->Arg(5120);

void BM_LayerNormBackward(benchmark::State& state) {
  const Tensor x = random_tensor({static_cast<std::size_t>(state.range(0)), 128}, 4, true);
  const Tensor g = Tensor::full({128}, 1.0);
  const Tensor b = Tensor::zeros({128});
  for (auto _ : state) {
    backward(ops::sum(ops::layer_norm(x, g, b)));
  }
}
BENCHMARK(BM_LayerNormBackward)->Arg(2048)->Arg(5120);

}  // namespace
