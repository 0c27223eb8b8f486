#include <benchmark/benchmark.h>

#include "bevdg/bev.hpp"
#include "bevdg/common.hpp"

namespace {

using namespace bevdg;

struct ScatterInputs {
  GridSpec spec{0.0, -16.0, 0.5, 64, 64};
  std::vector<double> xy;
  std::vector<double> features;
  int channels = 16;

  explicit ScatterInputs(size_t n) {
    Rng rng(42);
    xy.resize(2 * n);
    features.resize(n * channels);
    for (size_t i = 0; i < n; ++i) {
      xy[2 * i] = rng.uniform(-2.0, 34.0);
      xy[2 * i + 1] = rng.uniform(-18.0, 18.0);
    }
    for (double& f : features) f = rng.uniform(-1.0, 1.0);
  }
};

void BM_ScatterMax(benchmark::State& state) {
  const ScatterInputs in(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    BevGrid grid = scatter_max(in.features, in.channels, in.xy, in.spec);
    benchmark::DoNotOptimize(grid.features.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScatterMax)->Arg(500)->Arg(2000)->Arg(8000);

void BM_ScatterMaxWithArgmax(benchmark::State& state) {
  const ScatterInputs in(static_cast<size_t>(state.range(0)));
  std::vector<int32_t> argmax;
  for (auto _ : state) {
    BevGrid grid = scatter_max(in.features, in.channels, in.xy, in.spec, &argmax);
    benchmark::DoNotOptimize(grid.features.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScatterMaxWithArgmax)->Arg(2000);

void BM_FuseBev(benchmark::State& state) {
  Rng rng(7);
  GridSpec spec{0.0, -16.0, 0.5, 64, 64};
  BevGrid b2 = BevGrid::zeros(spec, 16);
  BevGrid b3 = BevGrid::zeros(spec, 16);
  for (int cell = 0; cell < spec.cell_count(); ++cell) {
    if (rng.uniform() < 0.7) continue;
    b2.counts[cell] = b3.counts[cell] = 1;
    for (int c = 0; c < 16; ++c) {
      b2.cell(cell)[c] = rng.uniform(-1, 1);
      b3.cell(cell)[c] = rng.uniform(-1, 1);
    }
  }
  LinearLayer fc1 = LinearLayer::zeros(32, 32);
  for (double& w : fc1.weight) w = rng.uniform(-0.2, 0.2);
  for (auto _ : state) {
    BevGrid out = fuse_bev(b2, b3, fc1);
    benchmark::DoNotOptimize(out.features.data());
  }
}
BENCHMARK(BM_FuseBev);

}  // namespace
