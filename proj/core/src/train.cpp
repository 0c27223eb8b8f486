#include "bevdg/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "bevdg/optimizer.hpp"

namespace bevdg {

namespace {

// Static-partition parallel loop; every index runs exactly once and writes
// only its own slots, so results do not depend on scheduling.
void parallel_for(size_t count, unsigned threads,
                  const std::function<void(size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned used = std::min<unsigned>(threads, static_cast<unsigned>(count));
  std::vector<std::thread> pool;
  pool.reserve(used);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned t = 0; t < used; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (size_t i = t; i < count; i += used) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

unsigned worker_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void accumulate(ModelParams* into, const ModelParams& from) {
  auto dst = into->layers();
  auto src = from.layers();
  for (size_t i = 0; i < dst.size(); ++i) {
    for (size_t k = 0; k < dst[i].layer->weight.size(); ++k) {
      dst[i].layer->weight[k] += src[i].layer->weight[k];
    }
    for (size_t k = 0; k < dst[i].layer->bias.size(); ++k) {
      dst[i].layer->bias[k] += src[i].layer->bias[k];
    }
  }
}

struct SceneJob {
  const PreparedScene* scene = nullptr;
  bool seg = false;      // contributes segmentation loss
  int source = 0;        // 1 or 2
  bool dt = false;       // density-transferred counterpart
  size_t batch_index = 0;
};

}  // namespace

LossReport batch_loss(const BatchScenes& batch, const ModelParams& params,
                      const Hyperparams& hyper, ModelParams* grads) {
  hyper.validate();
  const ModelConfig& cfg = params.config;
  if (batch.s1.empty() || batch.s2.empty() ||
      batch.s1.size() != batch.s1_dt.size() ||
      batch.s2.size() != batch.s2_dt.size()) {
    throw InvalidArgument("batch_loss: inconsistent batch");
  }
  const bool bdcl = cfg.bdcl;
  const size_t b1 = batch.s1.size();
  const size_t b2 = batch.s2.size();

  std::vector<SceneJob> jobs;
  for (size_t i = 0; i < b1; ++i) {
    jobs.push_back({batch.s1[i], true, 1, false, i});
    if (bdcl) jobs.push_back({batch.s1_dt[i], false, 1, true, i});
  }
  for (size_t i = 0; i < b2; ++i) {
    jobs.push_back({batch.s2[i], true, 2, false, i});
    if (bdcl) jobs.push_back({batch.s2_dt[i], false, 2, true, i});
  }

  std::vector<ForwardTrace> traces(jobs.size());
  parallel_for(jobs.size(), worker_threads(), [&](size_t j) {
    traces[j] = forward_scene(*jobs[j].scene, params);
  });

  // Segmentation losses (2D + 3D summed per scene, mean over the batch)
  // and upstream logit gradients.
  LossReport report;
  std::vector<std::vector<double>> dlogits2(jobs.size()), dlogits3(jobs.size());
  const int classes = cfg.num_classes;
  for (size_t j = 0; j < jobs.size(); ++j) {
    if (!jobs[j].seg) continue;
    const SceneJob& job = jobs[j];
    const ForwardTrace& t = traces[j];
    const double inv_b =
        1.0 / static_cast<double>(job.source == 1 ? b1 : b2);
    double* g2 = nullptr;
    double* g3 = nullptr;
    if (grads) {
      dlogits2[j].assign(static_cast<size_t>(job.scene->n) * classes, 0.0);
      dlogits3[j].assign(static_cast<size_t>(job.scene->n) * classes, 0.0);
      g2 = dlogits2[j].data();
      g3 = dlogits3[j].data();
    }
    const double seg =
        seg_loss_from_logp(t.logp2d, classes, job.scene->labels, inv_b, g2) +
        seg_loss_from_logp(t.logp3d, classes, job.scene->labels, inv_b, g3);
    (job.source == 1 ? report.seg_s1 : report.seg_s2) += seg * inv_b;
  }

  // Contrastive losses over density-maintained vectors.
  std::vector<std::vector<double>> dvec(jobs.size());
  if (bdcl) {
    for (int source = 1; source <= 2; ++source) {
      std::vector<std::vector<double>> v, vt;
      std::vector<size_t> v_job, vt_job;
      for (size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].source != source) continue;
        if (jobs[j].dt) {
          vt.push_back(traces[j].dvm.values);
          vt_job.push_back(j);
        } else {
          v.push_back(traces[j].dvm.values);
          v_job.push_back(j);
        }
      }
      std::vector<std::vector<double>> dv, dvt;
      const double ct = contrastive_loss(v, vt, hyper.tau,
                                         grads ? &dv : nullptr,
                                         grads ? &dvt : nullptr);
      (source == 1 ? report.ct_s1 : report.ct_s2) = ct;
      if (grads) {
        for (size_t i = 0; i < v_job.size(); ++i) {
          for (double& g : dv[i]) g *= hyper.lambda_ct;
          dvec[v_job[i]] = std::move(dv[i]);
        }
        for (size_t i = 0; i < vt_job.size(); ++i) {
          for (double& g : dvt[i]) g *= hyper.lambda_ct;
          dvec[vt_job[i]] = std::move(dvt[i]);
        }
      }
    }
  }

  report.total = total_loss(report.seg_s1, report.seg_s2, report.ct_s1,
                            report.ct_s2, hyper.lambda_ct);
  if (!std::isfinite(report.total)) {
    throw NumericError("batch_loss: non-finite loss");
  }

  if (grads) {
    std::vector<ModelParams> partial(jobs.size());
    parallel_for(jobs.size(), worker_threads(), [&](size_t j) {
      partial[j] = ModelParams::zeros_like(cfg);
      backward_scene(traces[j], params,
                     dlogits2[j].empty() ? nullptr : dlogits2[j].data(),
                     dlogits3[j].empty() ? nullptr : dlogits3[j].data(),
                     dvec[j].empty() ? nullptr : dvec[j].data(), &partial[j]);
    });
    for (size_t j = 0; j < jobs.size(); ++j) accumulate(grads, partial[j]);
  }
  return report;
}

TrainResult train(const TrainData& data, const ModelConfig& config,
                  const Hyperparams& hyper, uint64_t seed) {
  config.validate();
  hyper.validate();
  if (data.s1.empty() || data.s2.empty()) {
    throw InvalidArgument("train: both source streams must be non-empty");
  }
  if (config.bdcl && (data.s1_dt.size() != data.s1.size() ||
                      data.s2_dt.size() != data.s2.size())) {
    throw InvalidArgument(
        "train: density-transferred streams must align with sources");
  }

  TrainResult result{ModelParams::init(config, derive_seed(seed, "init")), {}};
  AdamState adam = AdamState::init(config);

  const size_t b = static_cast<size_t>(hyper.batch_size);
  for (int iter = 0; iter < hyper.iterations; ++iter) {
    Rng rng(derive_seed(seed, "batch", static_cast<uint64_t>(iter)));
    BatchScenes batch;
    for (size_t k = 0; k < b; ++k) {
      const size_t i1 = rng.uniform_below(data.s1.size());
      batch.s1.push_back(&data.s1[i1]);
      batch.s1_dt.push_back(config.bdcl ? &data.s1_dt[i1] : &data.s1[i1]);
      const size_t i2 = rng.uniform_below(data.s2.size());
      batch.s2.push_back(&data.s2[i2]);
      batch.s2_dt.push_back(config.bdcl ? &data.s2_dt[i2] : &data.s2[i2]);
    }

    ModelParams grads = ModelParams::zeros_like(config);
    const LossReport report = batch_loss(batch, result.params, hyper, &grads);
    adam_step(&result.params, grads, &adam, hyper.lr_at(iter), hyper.beta1,
              hyper.beta2);
    result.params.check_finite("after iteration " + std::to_string(iter));

    TrainLogRow row;
    row.iteration = iter;
    row.loss = report;
    if (!data.val_target.empty() && ((iter + 1) % hyper.val_interval == 0 ||
                                     iter + 1 == hyper.iterations)) {
      row.val = evaluate_prepared(result.params, data.val_target);
    }
    result.log.push_back(row);
  }
  return result;
}

}  // namespace bevdg
