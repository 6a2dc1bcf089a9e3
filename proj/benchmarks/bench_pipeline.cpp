#include <benchmark/benchmark.h>

#include "disk/kspace.hpp"
#include "disk/metrics.hpp"
#include "disk/phantom.hpp"

using namespace disk;

namespace {

void BM_GeneratePhantom(benchmark::State& state) {
  const PhantomConfig cfg{10, static_cast<std::size_t>(state.range(0)),
                          static_cast<std::size_t>(state.range(0)), 0.02};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_phantom(++seed, cfg));
}
BENCHMARK(BM_GeneratePhantom)->Arg(64)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_SynthesizeSamples(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const PhantomScan scan = generate_phantom(3, PhantomConfig{10, h, h, 0.02});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_samples(scan.image, 8.0, ++seed));
}
BENCHMARK(BM_SynthesizeSamples)->Arg(64)->Arg(80)->Unit(benchmark::kMicrosecond);

void BM_EvaluateLabels(benchmark::State& state) {
  const PhantomScan a = generate_phantom(1, PhantomConfig{10, 64, 64, 0.02});
  const PhantomScan b = generate_phantom(2, PhantomConfig{10, 64, 64, 0.02});
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_labels(a.labels, b.labels, 8.0, "x"));
}
BENCHMARK(BM_EvaluateLabels)->Unit(benchmark::kMicrosecond);

}  // namespace
