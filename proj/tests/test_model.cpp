#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "bevdg/model.hpp"
#include "bevdg/optimizer.hpp"

using namespace bevdg;

TEST_CASE("model init: deterministic, finite, shape-consistent") {
  ModelConfig cfg;
  const ModelParams a = ModelParams::init(cfg, 42);
  const ModelParams b = ModelParams::init(cfg, 42);
  CHECK(a.net2d_l1.weight == b.net2d_l1.weight);
  CHECK(a.fc1.weight == b.fc1.weight);
  CHECK_NOTHROW(a.check_finite("init"));

  CHECK(a.fc1.in_dim == cfg.c_2d + cfg.c_3d);
  CHECK(a.fc2_2d.in_dim == cfg.c_2d + cfg.fc1_out);
  CHECK(a.fc2_3d.in_dim == cfg.c_3d + cfg.fc1_out);
  CHECK(a.head2d.in_dim == cfg.fc2_out);

  const ModelParams c = ModelParams::init(cfg, 43);
  CHECK(a.net2d_l1.weight != c.net2d_l1.weight);
}

TEST_CASE("model config variants allocate only the layers they use") {
  ModelConfig baseline;
  baseline.fusion = FusionMode::kNone;
  baseline.bdcl = false;
  const ModelParams p = ModelParams::init(baseline, 1);
  CHECK(p.fc1.weight.empty());
  CHECK(p.fc2_2d.weight.empty());
  CHECK(p.head2d.in_dim == baseline.c_2d);
  CHECK(p.layers().size() == 6);

  ModelConfig point;
  point.fusion = FusionMode::kPoint;
  point.bdcl = false;
  const ModelParams q = ModelParams::init(point, 1);
  CHECK(q.fc1.weight.empty());
  CHECK(q.fc2_2d.in_dim == point.c_2d + point.c_3d);

  ModelConfig bdcl_only;
  bdcl_only.fusion = FusionMode::kNone;
  bdcl_only.bdcl = true;
  const ModelParams r = ModelParams::init(bdcl_only, 1);
  CHECK(!r.fc1.weight.empty());
  CHECK(r.fc2_2d.weight.empty());

  // Shared layers are identical across configurations for one seed.
  CHECK(p.net3d_l1.weight == q.net3d_l1.weight);
  CHECK(p.net3d_l1.weight == r.net3d_l1.weight);
}

TEST_CASE("flat parameter indexing covers every scalar exactly once") {
  ModelConfig cfg;
  cfg.hidden_2d = 4;
  cfg.hidden_3d = 4;
  cfg.c_2d = 4;
  cfg.c_3d = 4;
  cfg.fc1_out = 4;
  cfg.fc2_out = 4;
  ModelParams p = ModelParams::init(cfg, 7);
  const size_t n = p.param_count();
  size_t manual = 0;
  for (const auto& nl : p.layers()) {
    manual += nl.layer->weight.size() + nl.layer->bias.size();
  }
  CHECK(n == manual);
  // Writing through the flat view touches each scalar once.
  for (size_t i = 0; i < n; ++i) p.param(i) = static_cast<double>(i);
  double expect = 0.0;
  for (const auto& nl : p.layers()) {
    for (double w : nl.layer->weight) CHECK(w == expect++);
    for (double b : nl.layer->bias) CHECK(b == expect++);
  }
  CHECK_THROWS_AS(p.param(n), InvalidArgument);
}

TEST_CASE("checkpoint round trip is exact; corrupt headers are rejected") {
  ModelConfig cfg;
  cfg.fusion = FusionMode::kArea;
  cfg.bdcl = true;
  const ModelParams p = ModelParams::init(cfg, 99);
  const std::string path = "test_checkpoint.bdgm";
  write_checkpoint(path, p);
  const ModelParams q = read_checkpoint(path);
  CHECK(q.config == p.config);
  for (size_t i = 0; i < p.param_count(); ++i) {
    CHECK(p.param(i) == q.param(i));
  }

  // Flip the version field.
  {
    std::FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fseek(f, 4, SEEK_SET);
    const uint16_t bad = 9;
    std::fwrite(&bad, 2, 1, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
  std::remove(path.c_str());
}

TEST_CASE("hyperparams: validation and the two-drop schedule") {
  Hyperparams h;
  CHECK_NOTHROW(h.validate());
  h.iterations = 100;
  CHECK(h.lr_at(0) == doctest::Approx(1e-3));
  CHECK(h.lr_at(79) == doctest::Approx(1e-3));
  CHECK(h.lr_at(80) == doctest::Approx(1e-4));
  CHECK(h.lr_at(90) == doctest::Approx(1e-5));

  Hyperparams bad = h;
  bad.tau = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = h;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  ModelConfig cfg;
  ModelParams p = ModelParams::init(cfg, 3);
  const ModelParams before = p;
  const ModelParams zero_grads = ModelParams::zeros_like(cfg);
  AdamState state = AdamState::init(cfg);
  adam_step(&p, zero_grads, &state, 1e-3, 0.9, 0.999);
  for (size_t i = 0; i < p.param_count(); ++i) {
    CHECK(p.param(i) == before.param(i));
  }
}

TEST_CASE("adam: one step from zero state matches the scalar reference") {
  ModelConfig cfg;
  cfg.hidden_2d = cfg.hidden_3d = cfg.c_2d = cfg.c_3d = 2;
  cfg.fc1_out = cfg.fc2_out = 2;
  ModelParams p = ModelParams::init(cfg, 5);
  ModelParams g = ModelParams::zeros_like(cfg);
  Rng rng(11);
  for (size_t i = 0; i < g.param_count(); ++i) g.param(i) = rng.uniform(-1, 1);

  const ModelParams before = p;
  AdamState state = AdamState::init(cfg);
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  adam_step(&p, g, &state, lr, b1, b2, eps);
  for (size_t i = 0; i < p.param_count(); ++i) {
    const double grad = g.param(i);
    // Scalar reference for t=1.
    const double m = (1 - b1) * grad;
    const double v = (1 - b2) * grad * grad;
    const double mhat = m / (1 - b1);
    const double vhat = v / (1 - b2);
    const double want = before.param(i) - lr * mhat / (std::sqrt(vhat) + eps);
    CHECK(p.param(i) == doctest::Approx(want).epsilon(1e-15));
    if (grad != 0.0) CHECK(p.param(i) != before.param(i));
  }

  // Determinism: same inputs, same trajectory.
  ModelParams p2 = before;
  AdamState s2 = AdamState::init(cfg);
  adam_step(&p2, g, &s2, lr, b1, b2, eps);
  for (size_t i = 0; i < p.param_count(); ++i) {
    CHECK(p.param(i) == p2.param(i));
  }
}
