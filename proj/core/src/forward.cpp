#include "bevdg/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bevdg {

namespace {

// Neighborhood mean of the raw 3D inputs: the point itself plus its k
// nearest neighbors (3D Euclidean, ties broken toward lower index).
void knn_means(const std::vector<Point>& cloud, int k,
               std::vector<double>* out) {
  const int n = static_cast<int>(cloud.size());
  out->assign(static_cast<size_t>(n) * 4, 0.0);
  std::vector<std::pair<double, int>> dist(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 pi = cloud[i].position;
    for (int j = 0; j < n; ++j) {
      const Vec3 d = cloud[j].position - pi;
      dist[j] = {d.dot(d), j};
    }
    dist[i].first = -1.0;  // self always first
    const int take = std::min(k + 1, n);
    std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
    double sx = 0, sy = 0, sz = 0, si = 0;
    for (int t = 0; t < take; ++t) {
      const Point& p = cloud[dist[t].second];
      sx += p.position.x;
      sy += p.position.y;
      sz += p.position.z;
      si += p.intensity;
    }
    const double inv = 1.0 / take;
    double* row = &(*out)[static_cast<size_t>(i) * 4];
    row[0] = sx * inv;
    row[1] = sy * inv;
    row[2] = sz * inv;
    row[3] = si * inv;
  }
}

// Mean of the 3x3 window around (u, v), clipped at the image border.
void window_mean(const ImageGrid& img, int u, int v, double* out) {
  const int c = img.channels;
  std::fill_n(out, c, 0.0);
  int count = 0;
  for (int dv = -1; dv <= 1; ++dv) {
    for (int du = -1; du <= 1; ++du) {
      const int uu = u + du, vv = v + dv;
      if (uu < 0 || uu >= img.width || vv < 0 || vv >= img.height) continue;
      for (int ch = 0; ch < c; ++ch) out[ch] += img.at(vv, uu, ch);
      ++count;
    }
  }
  for (int ch = 0; ch < c; ++ch) out[ch] /= count;
}

}  // namespace

PreparedScene prepare_scene(const ScenePair& pair, const GridSpec& grid,
                            const ModelConfig& config) {
  grid.validate();
  config.validate();
  if (pair.cloud.empty()) {
    throw InvalidArgument("prepare_scene: empty cloud");
  }
  if (pair.image.channels != config.image_channels) {
    throw InvalidArgument("prepare_scene: image channel count mismatch");
  }
  if (pair.projection.size() != pair.cloud.size()) {
    throw InvalidArgument(
        "prepare_scene: projection must cover every point of the pair");
  }
  pair.validate_projection_bounds();

  PreparedScene s;
  s.n = static_cast<int>(pair.cloud.size());
  s.domain_tag = pair.domain_tag;
  s.grid = grid;

  std::vector<double> means;
  knn_means(pair.cloud, config.knn, &means);
  s.input3d.resize(static_cast<size_t>(s.n) * 8);
  s.xy.resize(static_cast<size_t>(s.n) * 2);
  s.cell.resize(s.n);
  s.labels.resize(s.n);
  for (int i = 0; i < s.n; ++i) {
    const Point& p = pair.cloud[i];
    double* row = &s.input3d[static_cast<size_t>(i) * 8];
    row[0] = p.position.x;
    row[1] = p.position.y;
    row[2] = p.position.z;
    row[3] = p.intensity;
    std::copy_n(&means[static_cast<size_t>(i) * 4], 4, row + 4);
    s.xy[2 * i] = p.position.x;
    s.xy[2 * i + 1] = p.position.y;
    s.cell[i] = assign_pillar_flat(p.position.x, p.position.y, grid);
    s.labels[i] = p.label;
  }

  const int fc = config.image_channels;
  s.input2d.resize(static_cast<size_t>(s.n) * 2 * fc);
  for (const auto& [idx, uv] : pair.projection) {
    const int u = static_cast<int>(std::floor(uv.first));
    const int v = static_cast<int>(std::floor(uv.second));
    double* row = &s.input2d[static_cast<size_t>(idx) * 2 * fc];
    for (int ch = 0; ch < fc; ++ch) row[ch] = pair.image.at(v, u, ch);
    window_mean(pair.image, u, v, row + fc);
  }
  return s;
}

namespace {

// y = max(0, W x + b) for a batch of rows; stores pre-activations too.
void affine_relu_batch(const LinearLayer& layer, const std::vector<double>& x,
                       int n, std::vector<double>* z, std::vector<double>* a) {
  z->resize(static_cast<size_t>(n) * layer.out_dim);
  a->resize(static_cast<size_t>(n) * layer.out_dim);
  for (int i = 0; i < n; ++i) {
    const double* xi = &x[static_cast<size_t>(i) * layer.in_dim];
    double* zi = &(*z)[static_cast<size_t>(i) * layer.out_dim];
    double* ai = &(*a)[static_cast<size_t>(i) * layer.out_dim];
    layer.apply(xi, zi);
    for (int o = 0; o < layer.out_dim; ++o) ai[o] = std::max(0.0, zi[o]);
  }
}

void log_softmax_rows(const std::vector<double>& logits, int n, int classes,
                      std::vector<double>* logp) {
  logp->resize(logits.size());
  for (int i = 0; i < n; ++i) {
    const double* row = &logits[static_cast<size_t>(i) * classes];
    double* out = &(*logp)[static_cast<size_t>(i) * classes];
    double m = row[0];
    for (int c = 1; c < classes; ++c) m = std::max(m, row[c]);
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(row[c] - m);
    const double lse = m + std::log(sum);
    for (int c = 0; c < classes; ++c) out[c] = row[c] - lse;
  }
}

}  // namespace

ForwardTrace forward_scene(const PreparedScene& scene,
                           const ModelParams& params) {
  const ModelConfig& cfg = params.config;
  const int n = scene.n;
  ForwardTrace t;
  t.scene = &scene;

  // Backbones.
  affine_relu_batch(params.net2d_l1, scene.input2d, n, &t.z1_2d, &t.a1_2d);
  affine_relu_batch(params.net2d_l2, t.a1_2d, n, &t.z2_2d, &t.f2d);
  affine_relu_batch(params.net3d_l1, scene.input3d, n, &t.z1_3d, &t.a1_3d);
  affine_relu_batch(params.net3d_l2, t.a1_3d, n, &t.z2_3d, &t.f3d);

  // BEV transformation and area-to-area fusion.
  if (cfg.has_fused_bev()) {
    t.bev2d = scatter_max(t.f2d, cfg.c_2d, scene.xy, scene.grid, &t.arg2d);
    t.bev3d = scatter_max(t.f3d, cfg.c_3d, scene.xy, scene.grid, &t.arg3d);

    const int cells = scene.grid.cell_count();
    t.fused = BevGrid::zeros(scene.grid, cfg.fc1_out);
    t.fused.counts = t.bev3d.counts;
    t.fused_z.assign(static_cast<size_t>(cells) * cfg.fc1_out, 0.0);
    t.fused_eval.assign(cells, 0);
    std::vector<double> cat(static_cast<size_t>(params.fc1.in_dim));
    for (int cell = 0; cell < cells; ++cell) {
      if (t.bev2d.counts[cell] == 0 && t.bev3d.counts[cell] == 0) continue;
      t.fused_eval[cell] = 1;
      std::copy_n(t.bev2d.cell(cell), cfg.c_2d, cat.data());
      std::copy_n(t.bev3d.cell(cell), cfg.c_3d, cat.data() + cfg.c_2d);
      double* z = &t.fused_z[static_cast<size_t>(cell) * cfg.fc1_out];
      params.fc1.apply(cat.data(), z);
      double* f = t.fused.cell(cell);
      for (int c = 0; c < cfg.fc1_out; ++c) f[c] = std::max(0.0, z[c]);
    }
  }

  // Point-level fusion.
  const double* head_in_2d = nullptr;
  const double* head_in_3d = nullptr;
  if (cfg.has_fc2()) {
    std::vector<double> cat2(static_cast<size_t>(params.fc2_2d.in_dim));
    std::vector<double> cat3(static_cast<size_t>(params.fc2_3d.in_dim));
    t.z3_2d.resize(static_cast<size_t>(n) * cfg.fc2_out);
    t.fbar2d.resize(static_cast<size_t>(n) * cfg.fc2_out);
    t.z3_3d.resize(static_cast<size_t>(n) * cfg.fc2_out);
    t.fbar3d.resize(static_cast<size_t>(n) * cfg.fc2_out);
    for (int i = 0; i < n; ++i) {
      const double* f2 = &t.f2d[static_cast<size_t>(i) * cfg.c_2d];
      const double* f3 = &t.f3d[static_cast<size_t>(i) * cfg.c_3d];
      std::copy_n(f2, cfg.c_2d, cat2.data());
      std::copy_n(f3, cfg.c_3d, cat3.data());
      if (cfg.fusion == FusionMode::kArea) {
        // The fused feature of the point's own cell; zero out of extent.
        const int cell = scene.cell[i];
        if (cell >= 0) {
          std::copy_n(t.fused.cell(cell), cfg.fc1_out, cat2.data() + cfg.c_2d);
          std::copy_n(t.fused.cell(cell), cfg.fc1_out, cat3.data() + cfg.c_3d);
        } else {
          std::fill_n(cat2.data() + cfg.c_2d, cfg.fc1_out, 0.0);
          std::fill_n(cat3.data() + cfg.c_3d, cfg.fc1_out, 0.0);
        }
      } else {
        // Point-to-point fusion: the other modality's feature.
        std::copy_n(f3, cfg.c_3d, cat2.data() + cfg.c_2d);
        std::copy_n(f2, cfg.c_2d, cat3.data() + cfg.c_3d);
      }
      double* z2 = &t.z3_2d[static_cast<size_t>(i) * cfg.fc2_out];
      double* z3 = &t.z3_3d[static_cast<size_t>(i) * cfg.fc2_out];
      params.fc2_2d.apply(cat2.data(), z2);
      params.fc2_3d.apply(cat3.data(), z3);
      for (int c = 0; c < cfg.fc2_out; ++c) {
        t.fbar2d[static_cast<size_t>(i) * cfg.fc2_out + c] = std::max(0.0, z2[c]);
        t.fbar3d[static_cast<size_t>(i) * cfg.fc2_out + c] = std::max(0.0, z3[c]);
      }
    }
    head_in_2d = t.fbar2d.data();
    head_in_3d = t.fbar3d.data();
  } else {
    head_in_2d = t.f2d.data();
    head_in_3d = t.f3d.data();
  }

  // Heads and log-softmax.
  t.logits2d.resize(static_cast<size_t>(n) * cfg.num_classes);
  t.logits3d.resize(static_cast<size_t>(n) * cfg.num_classes);
  for (int i = 0; i < n; ++i) {
    params.head2d.apply(head_in_2d + static_cast<size_t>(i) * params.head2d.in_dim,
                        &t.logits2d[static_cast<size_t>(i) * cfg.num_classes]);
    params.head3d.apply(head_in_3d + static_cast<size_t>(i) * params.head3d.in_dim,
                        &t.logits3d[static_cast<size_t>(i) * cfg.num_classes]);
  }
  log_softmax_rows(t.logits2d, n, cfg.num_classes, &t.logp2d);
  log_softmax_rows(t.logits3d, n, cfg.num_classes, &t.logp3d);

  // Density-maintained vector from the fused map.
  if (cfg.has_fused_bev()) {
    const AreaHistogram hist = area_histogram(t.fused);
    t.dvm = dvm_vector_trace(t.fused, hist);
  }
  return t;
}

namespace {

// Accumulates the gradient of one affine layer given upstream dz rows and
// the layer inputs; optionally emits dx.
void affine_backward(const LinearLayer& layer, const double* x,
                     const double* dz, LinearLayer* grad, double* dx) {
  for (int o = 0; o < layer.out_dim; ++o) {
    const double g = dz[o];
    if (g == 0.0) continue;
    grad->bias[o] += g;
    double* wrow = &grad->weight[static_cast<size_t>(o) * layer.in_dim];
    const double* lrow = &layer.weight[static_cast<size_t>(o) * layer.in_dim];
    for (int i = 0; i < layer.in_dim; ++i) {
      wrow[i] += g * x[i];
      if (dx) dx[i] += g * lrow[i];
    }
  }
}

// Backbone reverse pass: d_f is the gradient at the post-ReLU output.
void backbone_backward(const LinearLayer& l1, const LinearLayer& l2,
                       const std::vector<double>& input,
                       const std::vector<double>& z1,
                       const std::vector<double>& a1,
                       const std::vector<double>& z2,
                       const std::vector<double>& d_f, int n,
                       LinearLayer* g1, LinearLayer* g2) {
  std::vector<double> dz2(l2.out_dim);
  std::vector<double> da1(l2.in_dim);
  std::vector<double> dz1(l1.out_dim);
  for (int i = 0; i < n; ++i) {
    const double* z2i = &z2[static_cast<size_t>(i) * l2.out_dim];
    const double* dfi = &d_f[static_cast<size_t>(i) * l2.out_dim];
    bool any = false;
    for (int o = 0; o < l2.out_dim; ++o) {
      dz2[o] = z2i[o] > 0.0 ? dfi[o] : 0.0;
      any = any || dz2[o] != 0.0;
    }
    if (!any) continue;
    std::fill(da1.begin(), da1.end(), 0.0);
    affine_backward(l2, &a1[static_cast<size_t>(i) * l2.in_dim], dz2.data(),
                    g2, da1.data());
    const double* z1i = &z1[static_cast<size_t>(i) * l1.out_dim];
    for (int o = 0; o < l1.out_dim; ++o) {
      dz1[o] = z1i[o] > 0.0 ? da1[o] : 0.0;
    }
    affine_backward(l1, &input[static_cast<size_t>(i) * l1.in_dim], dz1.data(),
                    g1, nullptr);
  }
}

}  // namespace

void backward_scene(const ForwardTrace& t, const ModelParams& params,
                    const double* d_logits2d, const double* d_logits3d,
                    const double* d_vector, ModelParams* grads) {
  const ModelConfig& cfg = params.config;
  const PreparedScene& scene = *t.scene;
  const int n = scene.n;
  const int classes = cfg.num_classes;

  std::vector<double> d_f2d(static_cast<size_t>(n) * cfg.c_2d, 0.0);
  std::vector<double> d_f3d(static_cast<size_t>(n) * cfg.c_3d, 0.0);
  std::vector<double> d_fused;
  if (cfg.has_fused_bev()) {
    d_fused.assign(t.fused.features.size(), 0.0);
  }

  // Density-maintained vector -> fused cells.
  if (d_vector && cfg.has_fused_bev()) {
    const int c_out = cfg.fc1_out;
    std::vector<double> d_unnorm(c_out, 0.0);
    if (t.dvm.norm > 0.0) {
      // v = u / |u|: du = (dv - v (v . dv)) / |u|
      double vdot = 0.0;
      for (int c = 0; c < c_out; ++c) vdot += t.dvm.values[c] * d_vector[c];
      for (int c = 0; c < c_out; ++c) {
        d_unnorm[c] = (d_vector[c] - t.dvm.values[c] * vdot) / t.dvm.norm;
      }
    }
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < c_out; ++c) {
        const int32_t cell = t.dvm.argmax[static_cast<size_t>(b) * c_out + c];
        if (cell < 0) continue;
        d_fused[static_cast<size_t>(cell) * c_out + c] +=
            t.dvm.weights[b] * d_unnorm[c];
      }
    }
  }

  // Heads.
  const bool fc2 = cfg.has_fc2();
  std::vector<double> d_fbar2d, d_fbar3d;
  if (fc2) {
    d_fbar2d.assign(static_cast<size_t>(n) * cfg.fc2_out, 0.0);
    d_fbar3d.assign(static_cast<size_t>(n) * cfg.fc2_out, 0.0);
  }
  if (d_logits2d) {
    const double* in = fc2 ? t.fbar2d.data() : t.f2d.data();
    double* d_in = fc2 ? d_fbar2d.data() : d_f2d.data();
    const int in_dim = params.head2d.in_dim;
    for (int i = 0; i < n; ++i) {
      affine_backward(params.head2d, in + static_cast<size_t>(i) * in_dim,
                      d_logits2d + static_cast<size_t>(i) * classes,
                      &grads->head2d, d_in + static_cast<size_t>(i) * in_dim);
    }
  }
  if (d_logits3d) {
    const double* in = fc2 ? t.fbar3d.data() : t.f3d.data();
    double* d_in = fc2 ? d_fbar3d.data() : d_f3d.data();
    const int in_dim = params.head3d.in_dim;
    for (int i = 0; i < n; ++i) {
      affine_backward(params.head3d, in + static_cast<size_t>(i) * in_dim,
                      d_logits3d + static_cast<size_t>(i) * classes,
                      &grads->head3d, d_in + static_cast<size_t>(i) * in_dim);
    }
  }

  // Point-level fusion backward.
  if (fc2) {
    std::vector<double> cat2(params.fc2_2d.in_dim);
    std::vector<double> cat3(params.fc2_3d.in_dim);
    std::vector<double> dcat2(params.fc2_2d.in_dim);
    std::vector<double> dcat3(params.fc2_3d.in_dim);
    std::vector<double> dz(cfg.fc2_out);
    for (int i = 0; i < n; ++i) {
      const double* f2 = &t.f2d[static_cast<size_t>(i) * cfg.c_2d];
      const double* f3 = &t.f3d[static_cast<size_t>(i) * cfg.c_3d];
      const int cell = scene.cell[i];
      for (int mod = 0; mod < 2; ++mod) {
        const LinearLayer& fc = mod == 0 ? params.fc2_2d : params.fc2_3d;
        LinearLayer& gfc = mod == 0 ? grads->fc2_2d : grads->fc2_3d;
        const std::vector<double>& z3 = mod == 0 ? t.z3_2d : t.z3_3d;
        const std::vector<double>& d_fbar = mod == 0 ? d_fbar2d : d_fbar3d;
        std::vector<double>& cat = mod == 0 ? cat2 : cat3;
        std::vector<double>& dcat = mod == 0 ? dcat2 : dcat3;
        const int own = mod == 0 ? cfg.c_2d : cfg.c_3d;

        bool any = false;
        const double* z3i = &z3[static_cast<size_t>(i) * cfg.fc2_out];
        const double* dfi = &d_fbar[static_cast<size_t>(i) * cfg.fc2_out];
        for (int o = 0; o < cfg.fc2_out; ++o) {
          dz[o] = z3i[o] > 0.0 ? dfi[o] : 0.0;
          any = any || dz[o] != 0.0;
        }
        if (!any) continue;

        // Rebuild the concatenated input of this point.
        std::copy_n(mod == 0 ? f2 : f3, own, cat.data());
        if (cfg.fusion == FusionMode::kArea) {
          if (cell >= 0) {
            std::copy_n(t.fused.cell(cell), cfg.fc1_out, cat.data() + own);
          } else {
            std::fill_n(cat.data() + own, cfg.fc1_out, 0.0);
          }
        } else {
          std::copy_n(mod == 0 ? f3 : f2, mod == 0 ? cfg.c_3d : cfg.c_2d,
                      cat.data() + own);
        }
        std::fill(dcat.begin(), dcat.end(), 0.0);
        affine_backward(fc, cat.data(), dz.data(), &gfc, dcat.data());

        double* d_own = mod == 0 ? &d_f2d[static_cast<size_t>(i) * cfg.c_2d]
                                 : &d_f3d[static_cast<size_t>(i) * cfg.c_3d];
        for (int c = 0; c < own; ++c) d_own[c] += dcat[c];
        if (cfg.fusion == FusionMode::kArea) {
          if (cell >= 0) {
            double* df = &d_fused[static_cast<size_t>(cell) * cfg.fc1_out];
            for (int c = 0; c < cfg.fc1_out; ++c) df[c] += dcat[own + c];
          }
        } else {
          double* d_other = mod == 0
                                ? &d_f3d[static_cast<size_t>(i) * cfg.c_3d]
                                : &d_f2d[static_cast<size_t>(i) * cfg.c_2d];
          const int other = mod == 0 ? cfg.c_3d : cfg.c_2d;
          for (int c = 0; c < other; ++c) d_other[c] += dcat[own + c];
        }
      }
    }
  }

  // Area fusion backward: fc1 then scatter-max routing to points.
  if (cfg.has_fused_bev() && !d_fused.empty()) {
    const int cells = scene.grid.cell_count();
    std::vector<double> cat(params.fc1.in_dim);
    std::vector<double> dcat(params.fc1.in_dim);
    std::vector<double> dz(cfg.fc1_out);
    for (int cell = 0; cell < cells; ++cell) {
      if (!t.fused_eval[cell]) continue;
      const double* zc = &t.fused_z[static_cast<size_t>(cell) * cfg.fc1_out];
      const double* dfc = &d_fused[static_cast<size_t>(cell) * cfg.fc1_out];
      bool any = false;
      for (int o = 0; o < cfg.fc1_out; ++o) {
        dz[o] = zc[o] > 0.0 ? dfc[o] : 0.0;
        any = any || dz[o] != 0.0;
      }
      if (!any) continue;
      std::copy_n(t.bev2d.cell(cell), cfg.c_2d, cat.data());
      std::copy_n(t.bev3d.cell(cell), cfg.c_3d, cat.data() + cfg.c_2d);
      std::fill(dcat.begin(), dcat.end(), 0.0);
      affine_backward(params.fc1, cat.data(), dz.data(), &grads->fc1,
                      dcat.data());
      // Max pooling routes each channel's gradient to its argmax point.
      for (int c = 0; c < cfg.c_2d; ++c) {
        const int32_t p = t.arg2d[static_cast<size_t>(cell) * cfg.c_2d + c];
        if (p >= 0) d_f2d[static_cast<size_t>(p) * cfg.c_2d + c] += dcat[c];
      }
      for (int c = 0; c < cfg.c_3d; ++c) {
        const int32_t p = t.arg3d[static_cast<size_t>(cell) * cfg.c_3d + c];
        if (p >= 0) {
          d_f3d[static_cast<size_t>(p) * cfg.c_3d + c] += dcat[cfg.c_2d + c];
        }
      }
    }
  }

  // Backbones.
  backbone_backward(params.net2d_l1, params.net2d_l2, scene.input2d, t.z1_2d,
                    t.a1_2d, t.z2_2d, d_f2d, n, &grads->net2d_l1,
                    &grads->net2d_l2);
  backbone_backward(params.net3d_l1, params.net3d_l2, scene.input3d, t.z1_3d,
                    t.a1_3d, t.z2_3d, d_f3d, n, &grads->net3d_l1,
                    &grads->net3d_l2);
}

std::vector<double> probs_from_logp(const std::vector<double>& logp) {
  std::vector<double> probs(logp.size());
  for (size_t i = 0; i < logp.size(); ++i) probs[i] = std::exp(logp[i]);
  return probs;
}

ForwardResult forward(const ScenePair& pair, const ModelParams& params,
                      const GridSpec& grid) {
  const PreparedScene scene = prepare_scene(pair, grid, params.config);
  ForwardTrace t = forward_scene(scene, params);
  ForwardResult r;
  r.probs2d = probs_from_logp(t.logp2d);
  r.probs3d = probs_from_logp(t.logp3d);
  if (params.config.has_fused_bev()) {
    r.bev = std::move(t.fused);
    r.vector = BevVector{t.dvm.values, pair.domain_tag};
  }
  return r;
}

}  // namespace bevdg
