#include <benchmark/benchmark.h>

#include "disk/losses.hpp"
#include "disk/model.hpp"
#include "disk/phantom.hpp"
#include "disk/trainer.hpp"

using namespace disk;

namespace {

// Args: width, latents, layers, queries.
ModelConfig config_from(const benchmark::State& state) {
  ModelConfig cfg;
  cfg.width = static_cast<std::size_t>(state.range(0));
  cfg.ff_width = cfg.width;
  cfg.latents = static_cast<std::size_t>(state.range(1));
  cfg.layers = static_cast<std::size_t>(state.range(2));
  return cfg;
}

const PhantomScan& scan64() {
  static const PhantomScan scan = generate_phantom(7, PhantomConfig{10, 64, 64, 0.02});
  return scan;
}

void BM_Encode(benchmark::State& state) {
  const ModelConfig cfg = config_from(state);
  const ModelParameters params = ModelParameters::initialize(cfg, 1);
  const KSpaceSampleSet samples = synthesize_samples(scan64().image, 8.0, 3);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(encode(samples, params, cfg));
  state.counters["N"] = static_cast<double>(samples.size());
}
BENCHMARK(BM_Encode)->Args({128, 128, 4, 0})->Args({64, 64, 2, 0})->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  RunConfig run;
  run.model = config_from(state);
  run.phantom = PhantomConfig{10, 64, 64, 0.02};
  run.train.queries = static_cast<std::size_t>(state.range(3));
  TrainState ts = init_train_state(run.model, 0);
  for (auto _ : state) benchmark::DoNotOptimize(train_step(ts, scan64(), run));
}
BENCHMARK(BM_TrainStep)
    ->Args({128, 128, 4, 2048})
    ->Args({64, 64, 2, 1024})
    ->Args({64, 32, 2, 1024})
    ->Unit(benchmark::kMillisecond);

void BM_PredictFull(benchmark::State& state) {
  RunConfig run;
  run.model = config_from(state);
  const ModelParameters params = ModelParameters::initialize(run.model, 1);
  for (auto _ : state) benchmark::DoNotOptimize(predict_full(scan64(), 8.0, params, run, 8192));
}
BENCHMARK(BM_PredictFull)->Args({64, 64, 2, 0})->Unit(benchmark::kMillisecond);

}  // namespace
