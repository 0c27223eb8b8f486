#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bevdg/train.hpp"
#include "test_fixtures.hpp"

using namespace bevdg;
using namespace bevdg::testing;

namespace {

TrainData small_train_data(const ModelConfig& cfg, int scenes = 3) {
  const GridSpec grid = tiny_grid();
  const LidarConfig l16 = tiny_lidar(16);
  const LidarConfig l64 = tiny_lidar(64);
  const LidarConfig l32 = tiny_lidar(32);
  TrainData data;
  for (int i = 0; i < scenes; ++i) {
    const ScenePair p1 = tiny_pair(100 + i, 16);
    data.s1.push_back(prepare_scene(p1, grid, cfg));
    data.s1_dt.push_back(prepare_scene(
        density_transfer_pair(p1, l16, l64, 100 + i), grid, cfg));
    const ScenePair p2 = tiny_pair(200 + i, 64);
    data.s2.push_back(prepare_scene(p2, grid, cfg));
    data.s2_dt.push_back(prepare_scene(
        density_transfer_pair(p2, l64, l16, 200 + i), grid, cfg));
  }
  for (int i = 0; i < 2; ++i) {
    data.val_target.push_back(
        prepare_scene(tiny_pair(300 + i, 32), grid, cfg));
  }
  return data;
}

ModelConfig small_model() {
  ModelConfig cfg;
  cfg.hidden_2d = cfg.hidden_3d = 8;
  cfg.c_2d = cfg.c_3d = 8;
  cfg.fc1_out = 12;
  cfg.fc2_out = 12;
  return cfg;
}

}  // namespace

TEST_CASE("train: zero iterations returns the seeded initial parameters") {
  const ModelConfig cfg = small_model();
  const TrainData data = small_train_data(cfg);
  Hyperparams hyper;
  hyper.iterations = 0;
  hyper.batch_size = 2;
  const TrainResult r = train(data, cfg, hyper, 9);
  CHECK(r.log.empty());
  const ModelParams init = ModelParams::init(cfg, derive_seed(9, "init"));
  for (size_t i = 0; i < init.param_count(); ++i) {
    CHECK(r.params.param(i) == init.param(i));
  }
}

TEST_CASE("train: identical seeds give bit-identical logs and parameters") {
  const ModelConfig cfg = small_model();
  const TrainData data = small_train_data(cfg);
  Hyperparams hyper;
  hyper.iterations = 8;
  hyper.batch_size = 2;
  hyper.val_interval = 4;
  const TrainResult a = train(data, cfg, hyper, 77);
  const TrainResult b = train(data, cfg, hyper, 77);
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].loss.total == b.log[i].loss.total);
    CHECK(a.log[i].val.has_value() == b.log[i].val.has_value());
    if (a.log[i].val) {
      CHECK(a.log[i].val->miou_avg == b.log[i].val->miou_avg);
    }
  }
  for (size_t i = 0; i < a.params.param_count(); ++i) {
    CHECK(a.params.param(i) == b.params.param(i));
  }
  const TrainResult c = train(data, cfg, hyper, 78);
  CHECK(a.log.back().loss.total != c.log.back().loss.total);
}

TEST_CASE("train: loss decreases over a short run") {
  const ModelConfig cfg = small_model();
  const TrainData data = small_train_data(cfg);
  Hyperparams hyper;
  hyper.iterations = 120;
  hyper.batch_size = 2;
  hyper.val_interval = 1000;
  const TrainResult r = train(data, cfg, hyper, 11);

  const auto median_total = [&](size_t lo, size_t hi) {
    std::vector<double> v;
    for (size_t i = lo; i < hi; ++i) v.push_back(r.log[i].loss.total);
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const size_t tenth = r.log.size() / 10;
  const double first = median_total(0, tenth);
  const double last = median_total(r.log.size() - tenth, r.log.size());
  CHECK(last < first);
}

TEST_CASE("batch_loss: report total satisfies the weighting identity") {
  const ModelConfig cfg = small_model();
  const TrainData data = small_train_data(cfg, 2);
  Hyperparams hyper;
  hyper.batch_size = 2;
  BatchScenes batch;
  batch.s1 = {&data.s1[0], &data.s1[1]};
  batch.s1_dt = {&data.s1_dt[0], &data.s1_dt[1]};
  batch.s2 = {&data.s2[0], &data.s2[1]};
  batch.s2_dt = {&data.s2_dt[0], &data.s2_dt[1]};
  const ModelParams params = ModelParams::init(cfg, 5);
  const LossReport rep = batch_loss(batch, params, hyper, nullptr);
  CHECK(rep.total == doctest::Approx(rep.seg_s1 + rep.seg_s2 +
                                     hyper.lambda_ct * (rep.ct_s1 + rep.ct_s2))
                         .epsilon(1e-12));
  CHECK(rep.seg_s1 > 0.0);
  CHECK(rep.ct_s1 >= std::log(2.0) - 1e-9);
}

TEST_CASE("batch_loss: gradient reduction is identical across thread counts") {
  // The parallel path must be bit-identical to sequential reduction; run
  // the same batch twice and compare every gradient entry.
  const ModelConfig cfg = small_model();
  const TrainData data = small_train_data(cfg, 2);
  Hyperparams hyper;
  hyper.batch_size = 2;
  BatchScenes batch;
  batch.s1 = {&data.s1[0], &data.s1[1]};
  batch.s1_dt = {&data.s1_dt[0], &data.s1_dt[1]};
  batch.s2 = {&data.s2[0], &data.s2[1]};
  batch.s2_dt = {&data.s2_dt[0], &data.s2_dt[1]};
  const ModelParams params = ModelParams::init(cfg, 5);
  ModelParams g1 = ModelParams::zeros_like(cfg);
  ModelParams g2 = ModelParams::zeros_like(cfg);
  batch_loss(batch, params, hyper, &g1);
  batch_loss(batch, params, hyper, &g2);
  for (size_t i = 0; i < g1.param_count(); ++i) {
    CHECK(g1.param(i) == g2.param(i));
  }
}

TEST_CASE("train: empty source stream is rejected") {
  const ModelConfig cfg = small_model();
  TrainData data;
  Hyperparams hyper;
  CHECK_THROWS_AS(train(data, cfg, hyper, 1), InvalidArgument);
}
