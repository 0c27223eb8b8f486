#pragma once

#include "bevdg/model.hpp"

namespace bevdg {

// Adam with bias-corrected first/second moments.
struct AdamState {
  ModelParams m;
  ModelParams v;
  int64_t t = 0;

  static AdamState init(const ModelConfig& config);
};

void adam_step(ModelParams* params, const ModelParams& grads, AdamState* state,
               double lr, double beta1, double beta2, double eps = 1e-8);

}  // namespace bevdg
