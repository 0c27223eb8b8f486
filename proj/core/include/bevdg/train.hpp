#pragma once

#include <optional>
#include <vector>

#include "bevdg/eval.hpp"
#include "bevdg/forward.hpp"
#include "bevdg/losses.hpp"
#include "bevdg/model.hpp"

namespace bevdg {

// One two-source batch, non-owning. s*_dt holds the density-transferred
// counterpart of the scene at the same index.
struct BatchScenes {
  std::vector<const PreparedScene*> s1, s1_dt;
  std::vector<const PreparedScene*> s2, s2_dt;
};

// Full objective over one batch: mean segmentation loss per source (2D +
// 3D terms), the per-source contrastive losses over density-maintained
// vectors, and their weighted total. When `grads` is non-null the reverse
// pass accumulates d(total)/d(params) into it. Scene forward/backward
// passes run in parallel; gradients are reduced in a fixed order, so the
// result is bit-identical to the sequential evaluation.
LossReport batch_loss(const BatchScenes& batch, const ModelParams& params,
                      const Hyperparams& hyper, ModelParams* grads);

// Training data: prepared scenes per source with aligned density-transfer
// counterparts, plus held-out target scenes for periodic validation.
struct TrainData {
  std::vector<PreparedScene> s1, s1_dt;
  std::vector<PreparedScene> s2, s2_dt;
  std::vector<PreparedScene> val_target;
};

struct TrainLogRow {
  int iteration = 0;
  LossReport loss;
  std::optional<EvalScores> val;  // present on validation iterations
};

struct TrainResult {
  ModelParams params;
  std::vector<TrainLogRow> log;
};

// The two-source training loop: per iteration, sample one batch per source,
// evaluate the full objective and take one Adam step. Fully deterministic
// in (data, config, hyper, seed); propagates NumericError on NaN/Inf.
TrainResult train(const TrainData& data, const ModelConfig& config,
                  const Hyperparams& hyper, uint64_t seed);

}  // namespace bevdg
