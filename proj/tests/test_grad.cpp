#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bevdg/train.hpp"
#include "test_fixtures.hpp"

using namespace bevdg;
using namespace bevdg::testing;

namespace {

// Builds a deterministic hand-made pair: one point, tiny image.
ScenePair one_point_pair() {
  ScenePair pair;
  pair.domain_tag = "t";
  Point p;
  p.position = {2.3, 0.4, 0.7};
  p.intensity = 0.5;
  p.label = kCar;
  pair.cloud.push_back(p);
  pair.image.height = 4;
  pair.image.width = 4;
  pair.image.channels = 3;
  pair.image.data.resize(4 * 4 * 3);
  pair.image.labels.assign(16, kBackground);
  for (int v = 0; v < 4; ++v) {
    for (int u = 0; u < 4; ++u) {
      for (int c = 0; c < 3; ++c) {
        pair.image.data[(v * 4 + u) * 3 + c] =
            0.1 * (v * 4 + u) + 0.01 * c;
      }
    }
  }
  pair.projection.emplace(0, std::make_pair(1.2, 2.7));
  return pair;
}

struct FdCase {
  BatchScenes batch;
  std::vector<PreparedScene> storage;
};

double loss_of(const BatchScenes& batch, const ModelParams& params,
               const Hyperparams& hyper) {
  return batch_loss(batch, params, hyper, nullptr).total;
}

// Central finite differences against the analytic gradient for every
// parameter. Relative error below rtol, with an absolute floor for
// gradients at the finite-difference noise level. eps = 1e-6 keeps the
// stencil narrow enough that it never straddles a ReLU corner while the
// secant noise stays three orders below the tolerance.
void check_gradients(const BatchScenes& batch, const ModelConfig& cfg,
                     const Hyperparams& hyper, uint64_t seed,
                     double rtol = 1e-4, double eps = 1e-6) {
  ModelParams params = ModelParams::init(cfg, seed);
  ModelParams grads = ModelParams::zeros_like(cfg);
  batch_loss(batch, params, hyper, &grads);

  size_t checked = 0, nonzero = 0;
  for (size_t i = 0; i < params.param_count(); ++i) {
    const double saved = params.param(i);
    params.param(i) = saved + eps;
    const double up = loss_of(batch, params, hyper);
    params.param(i) = saved - eps;
    const double down = loss_of(batch, params, hyper);
    params.param(i) = saved;
    const double fd = (up - down) / (2 * eps);
    const double an = grads.param(i);
    const double err = std::abs(fd - an);
    const double tol = std::max(1e-8, rtol * std::max(std::abs(fd), std::abs(an)));
    if (err > tol) {
      CAPTURE(i);
      CAPTURE(fd);
      CAPTURE(an);
      REQUIRE(err <= tol);
    }
    ++checked;
    if (an != 0.0) ++nonzero;
  }
  CHECK(checked == params.param_count());
  // The check is vacuous if everything is dead.
  CHECK(nonzero > checked / 4);
}

}  // namespace

TEST_CASE("forward: all-zero parameters give the uniform distribution") {
  const ScenePair pair = tiny_pair(3);
  const ModelConfig cfg;
  const ModelParams zeros = ModelParams::zeros_like(cfg);
  const ForwardResult r = forward(pair, zeros, tiny_grid());
  for (double p : r.probs2d) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
  for (double p : r.probs3d) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("forward: probability rows sum to 1 within 1e-9") {
  const ScenePair pair = tiny_pair(4);
  ModelConfig cfg;
  const ModelParams params = ModelParams::init(cfg, 8);
  const ForwardResult r = forward(pair, params, tiny_grid());
  const size_t n = pair.cloud.size();
  for (size_t i = 0; i < n; ++i) {
    double s2 = 0, s3 = 0;
    for (int c = 0; c < kNumClasses; ++c) {
      s2 += r.probs2d[i * kNumClasses + c];
      s3 += r.probs3d[i * kNumClasses + c];
    }
    CHECK(std::abs(s2 - 1.0) <= 1e-9);
    CHECK(std::abs(s3 - 1.0) <= 1e-9);
  }
}

TEST_CASE("forward: single-point scene equals a hand-composed scalar trace") {
  const ScenePair pair = one_point_pair();
  ModelConfig cfg;
  cfg.hidden_2d = cfg.hidden_3d = 4;
  cfg.c_2d = cfg.c_3d = 3;
  cfg.fc1_out = 4;
  cfg.fc2_out = 4;
  const ModelParams mp = ModelParams::init(cfg, 77);
  const GridSpec grid = tiny_grid();
  const ForwardResult got = forward(pair, mp, grid);

  // Hand trace. Inputs: the single point is its own neighborhood.
  const Point& p = pair.cloud[0];
  const std::vector<double> in3{p.position.x, p.position.y, p.position.z,
                                p.intensity,  p.position.x, p.position.y,
                                p.position.z, p.intensity};
  // Pixel (1, 2): raw channels plus clipped 3x3 window mean.
  std::vector<double> in2(6, 0.0);
  for (int c = 0; c < 3; ++c) in2[c] = pair.image.at(2, 1, c);
  int cnt = 0;
  for (int dv = -1; dv <= 1; ++dv) {
    for (int du = -1; du <= 1; ++du) {
      const int u = 1 + du, v = 2 + dv;
      if (u < 0 || u >= 4 || v < 0 || v >= 4) continue;
      for (int c = 0; c < 3; ++c) in2[3 + c] += pair.image.at(v, u, c);
      ++cnt;
    }
  }
  for (int c = 0; c < 3; ++c) in2[3 + c] /= cnt;

  const auto affine_relu = [](const LinearLayer& l,
                              const std::vector<double>& x) {
    std::vector<double> y(l.out_dim);
    for (int o = 0; o < l.out_dim; ++o) {
      double acc = l.bias[o];
      for (int i = 0; i < l.in_dim; ++i) acc += l.weight[o * l.in_dim + i] * x[i];
      y[o] = std::max(0.0, acc);
    }
    return y;
  };
  const std::vector<double> f3 = affine_relu(mp.net3d_l2, affine_relu(mp.net3d_l1, in3));
  const std::vector<double> f2 = affine_relu(mp.net2d_l2, affine_relu(mp.net2d_l1, in2));

  // One occupied pillar: both BEV cells hold the single point's features,
  // fused via fc1.
  std::vector<double> cat(f2);
  cat.insert(cat.end(), f3.begin(), f3.end());
  const std::vector<double> fused = affine_relu(mp.fc1, cat);

  std::vector<double> cat2(f2), cat3(f3);
  cat2.insert(cat2.end(), fused.begin(), fused.end());
  cat3.insert(cat3.end(), fused.begin(), fused.end());
  const std::vector<double> fbar2 = affine_relu(mp.fc2_2d, cat2);
  const std::vector<double> fbar3 = affine_relu(mp.fc2_3d, cat3);

  const auto head_softmax = [](const LinearLayer& head,
                               const std::vector<double>& x) {
    std::vector<double> logits(head.out_dim);
    for (int o = 0; o < head.out_dim; ++o) {
      double acc = head.bias[o];
      for (int i = 0; i < head.in_dim; ++i) {
        acc += head.weight[o * head.in_dim + i] * x[i];
      }
      logits[o] = acc;
    }
    double m = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - m);
    std::vector<double> probs(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
      probs[i] = std::exp(logits[i] - m) / denom;
    }
    return probs;
  };
  const std::vector<double> want2 = head_softmax(mp.head2d, fbar2);
  const std::vector<double> want3 = head_softmax(mp.head3d, fbar3);
  for (int c = 0; c < kNumClasses; ++c) {
    CHECK(got.probs2d[c] == doctest::Approx(want2[c]).epsilon(1e-12));
    CHECK(got.probs3d[c] == doctest::Approx(want3[c]).epsilon(1e-12));
  }

  // The density-maintained vector of the single-cell map is the normalized
  // fused feature (weight 1 on the low bin).
  double sq = 0.0;
  for (double v : fused) sq += v * v;
  const double norm = std::sqrt(sq);
  REQUIRE(norm > 0.0);
  for (int c = 0; c < cfg.fc1_out; ++c) {
    CHECK(got.vector.values[c] ==
          doctest::Approx(fused[c] / norm).epsilon(1e-12));
  }
}

TEST_CASE("backward: constant loss paths produce zero gradients") {
  // lambda_ct = 0 and no segmentation upstream: nothing flows.
  const ScenePair pair = tiny_pair(5);
  ModelConfig cfg;
  cfg.hidden_2d = cfg.hidden_3d = 4;
  cfg.c_2d = cfg.c_3d = 4;
  cfg.fc1_out = cfg.fc2_out = 4;
  const ModelParams params = ModelParams::init(cfg, 12);
  const PreparedScene scene = prepare_scene(pair, tiny_grid(), cfg);
  const ForwardTrace t = forward_scene(scene, params);
  ModelParams grads = ModelParams::zeros_like(cfg);
  backward_scene(t, params, nullptr, nullptr, nullptr, &grads);
  for (size_t i = 0; i < grads.param_count(); ++i) {
    CHECK(grads.param(i) == 0.0);
  }
}

TEST_CASE("backward: gradient reaches the backbones only through argmax points") {
  const ScenePair pair = tiny_pair(6);
  ModelConfig cfg;
  cfg.hidden_2d = cfg.hidden_3d = 8;
  cfg.c_2d = cfg.c_3d = 8;
  cfg.fc1_out = cfg.fc2_out = 8;
  const ModelParams params = ModelParams::init(cfg, 13);
  const PreparedScene scene = prepare_scene(pair, tiny_grid(), cfg);
  const ForwardTrace t = forward_scene(scene, params);

  // Drive one vector channel whose fused argmax cell has an open ReLU gate
  // and whose direction is not parallel to the vector (the normalization
  // Jacobian removes the parallel component).
  int channel = -1;
  for (int c = 0; c < cfg.fc1_out; ++c) {
    const int32_t cell = t.dvm.argmax[c];  // low bin
    if (cell >= 0 && t.fused_z[static_cast<size_t>(cell) * cfg.fc1_out + c] > 0 &&
        std::abs(t.dvm.values[c]) < 0.9) {
      channel = c;
      break;
    }
  }
  REQUIRE(channel >= 0);
  std::vector<double> d_vec(cfg.fc1_out, 0.0);
  d_vec[channel] = 1.0;
  ModelParams grads = ModelParams::zeros_like(cfg);
  backward_scene(t, params, nullptr, nullptr, d_vec.data(), &grads);

  // The vector branch alone moves backbone parameters (via argmax points).
  bool any = false;
  for (double w : grads.net3d_l1.weight) any = any || w != 0.0;
  for (double w : grads.net2d_l1.weight) any = any || w != 0.0;
  CHECK(any);

  // And plenty of points are nobody's argmax; only max contributors can
  // carry the pooled-cell gradient (the selection itself is verified by
  // the finite-difference suite).
  std::vector<bool> is_argmax(scene.n, false);
  for (int32_t p : t.arg3d) {
    if (p >= 0) is_argmax[p] = true;
  }
  for (int32_t p : t.arg2d) {
    if (p >= 0) is_argmax[p] = true;
  }
  CHECK(std::count(is_argmax.begin(), is_argmax.end(), false) > 0);
}

TEST_CASE("gradients match finite differences through the full objective") {
  // Two scenes per source plus density-transferred counterparts; area
  // fusion and the contrastive branch enabled: the complete pipeline.
  ModelConfig cfg;
  cfg.hidden_2d = cfg.hidden_3d = 6;
  cfg.c_2d = cfg.c_3d = 6;
  cfg.fc1_out = 8;
  cfg.fc2_out = 8;
  cfg.fusion = FusionMode::kArea;
  cfg.bdcl = true;

  Hyperparams hyper;
  hyper.tau = 0.01;
  hyper.lambda_ct = 0.01;
  hyper.batch_size = 2;

  const GridSpec grid = tiny_grid();
  const LidarConfig l16 = tiny_lidar(16);
  const LidarConfig l32 = tiny_lidar(32);

  std::vector<PreparedScene> storage;
  auto add = [&](const ScenePair& pair) {
    storage.push_back(prepare_scene(pair, grid, cfg));
  };
  for (uint64_t s : {21ull, 22ull}) {
    const ScenePair pair = tiny_pair(s, 16);
    add(pair);
    add(density_transfer_pair(pair, l16, l32, s));
  }
  for (uint64_t s : {23ull, 24ull}) {
    const ScenePair pair = tiny_pair(s, 32);
    add(pair);
    add(density_transfer_pair(pair, l32, l16, s));
  }
  BatchScenes batch;
  batch.s1 = {&storage[0], &storage[2]};
  batch.s1_dt = {&storage[1], &storage[3]};
  batch.s2 = {&storage[4], &storage[6]};
  batch.s2_dt = {&storage[5], &storage[7]};

  check_gradients(batch, cfg, hyper, 3001);
}

TEST_CASE("gradients match finite differences for point fusion and baseline") {
  const GridSpec grid = tiny_grid();
  std::vector<PreparedScene> storage;

  for (FusionMode mode : {FusionMode::kPoint, FusionMode::kNone}) {
    ModelConfig cfg;
    cfg.hidden_2d = cfg.hidden_3d = 5;
    cfg.c_2d = cfg.c_3d = 5;
    cfg.fc1_out = 6;
    cfg.fc2_out = 6;
    cfg.fusion = mode;
    cfg.bdcl = false;

    Hyperparams hyper;
    hyper.lambda_ct = 0.0;
    hyper.batch_size = 1;

    storage.clear();
    storage.push_back(prepare_scene(tiny_pair(31, 16), grid, cfg));
    storage.push_back(prepare_scene(tiny_pair(32, 32), grid, cfg));
    BatchScenes batch;
    batch.s1 = {&storage[0]};
    batch.s1_dt = {&storage[0]};
    batch.s2 = {&storage[1]};
    batch.s2_dt = {&storage[1]};

    check_gradients(batch, cfg, hyper, 3002);
  }
}
