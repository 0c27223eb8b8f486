#include "bevdg/optimizer.hpp"

#include <cmath>

namespace bevdg {

AdamState AdamState::init(const ModelConfig& config) {
  AdamState s;
  s.m = ModelParams::zeros_like(config);
  s.v = ModelParams::zeros_like(config);
  return s;
}

namespace {

void update_array(std::vector<double>* p, const std::vector<double>& g,
                  std::vector<double>* m, std::vector<double>* v, double lr,
                  double beta1, double beta2, double bc1, double bc2,
                  double eps) {
  for (size_t i = 0; i < p->size(); ++i) {
    (*m)[i] = beta1 * (*m)[i] + (1.0 - beta1) * g[i];
    (*v)[i] = beta2 * (*v)[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = (*m)[i] / bc1;
    const double vhat = (*v)[i] / bc2;
    (*p)[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

void adam_step(ModelParams* params, const ModelParams& grads, AdamState* state,
               double lr, double beta1, double beta2, double eps) {
  state->t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state->t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state->t));
  auto pl = params->layers();
  auto gl = grads.layers();
  auto ml = state->m.layers();
  auto vl = state->v.layers();
  if (gl.size() != pl.size() || ml.size() != pl.size() ||
      vl.size() != pl.size()) {
    throw InvalidArgument("adam_step: state/gradient layout mismatch");
  }
  for (size_t i = 0; i < pl.size(); ++i) {
    update_array(&pl[i].layer->weight, gl[i].layer->weight,
                 &ml[i].layer->weight, &vl[i].layer->weight, lr, beta1, beta2,
                 bc1, bc2, eps);
    update_array(&pl[i].layer->bias, gl[i].layer->bias, &ml[i].layer->bias,
                 &vl[i].layer->bias, lr, beta1, beta2, bc1, bc2, eps);
  }
}

}  // namespace bevdg
