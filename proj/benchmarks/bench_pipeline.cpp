#include <benchmark/benchmark.h>

#include "bevdg/forward.hpp"
#include "bevdg/harness.hpp"

namespace {

using namespace bevdg;

ExperimentConfig bench_config() {
  ExperimentConfig cfg = ExperimentConfig::desk_default();
  cfg.source2.azimuth_step_deg = 1.5;
  return cfg;
}

void BM_SceneSynthesis(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  uint64_t seed = 0;
  for (auto _ : state) {
    const World world = generate_world(seed, cfg.world);
    const ScenePair pair =
        make_scene_pair(world, cfg.source2, cfg.camera, seed);
    benchmark::DoNotOptimize(pair.cloud.size());
    ++seed;
  }
}
BENCHMARK(BM_SceneSynthesis)->Unit(benchmark::kMillisecond);

void BM_PrepareScene(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  const World world = generate_world(1, cfg.world);
  const ScenePair pair = make_scene_pair(world, cfg.source2, cfg.camera, 1);
  for (auto _ : state) {
    const PreparedScene scene = prepare_scene(pair, cfg.grid, cfg.model);
    benchmark::DoNotOptimize(scene.input3d.data());
  }
  state.SetLabel(std::to_string(pair.cloud.size()) + " points");
}
BENCHMARK(BM_PrepareScene)->Unit(benchmark::kMillisecond);

void BM_ForwardScene(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  const World world = generate_world(1, cfg.world);
  const ScenePair pair = make_scene_pair(world, cfg.source2, cfg.camera, 1);
  const PreparedScene scene = prepare_scene(pair, cfg.grid, cfg.model);
  const ModelParams params = ModelParams::init(cfg.model, 3);
  for (auto _ : state) {
    const ForwardTrace t = forward_scene(scene, params);
    benchmark::DoNotOptimize(t.logits3d.data());
  }
  state.SetLabel(std::to_string(scene.n) + " points");
}
BENCHMARK(BM_ForwardScene)->Unit(benchmark::kMillisecond);

void BM_ForwardBackwardScene(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  const World world = generate_world(1, cfg.world);
  const ScenePair pair = make_scene_pair(world, cfg.source2, cfg.camera, 1);
  const PreparedScene scene = prepare_scene(pair, cfg.grid, cfg.model);
  const ModelParams params = ModelParams::init(cfg.model, 3);
  const int classes = cfg.model.num_classes;
  std::vector<double> d2(static_cast<size_t>(scene.n) * classes, 1e-3);
  std::vector<double> d3(static_cast<size_t>(scene.n) * classes, 1e-3);
  for (auto _ : state) {
    const ForwardTrace t = forward_scene(scene, params);
    ModelParams grads = ModelParams::zeros_like(cfg.model);
    backward_scene(t, params, d2.data(), d3.data(), nullptr, &grads);
    benchmark::DoNotOptimize(grads.head3d.weight.data());
  }
  state.SetLabel(std::to_string(scene.n) + " points");
}
BENCHMARK(BM_ForwardBackwardScene)->Unit(benchmark::kMillisecond);

}  // namespace
