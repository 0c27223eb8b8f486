#pragma once

#include <cstdint>
#include <vector>

namespace bevdg {

// Per-iteration loss breakdown: mean segmentation cross-entropy per source
// (2D and 3D terms summed), contrastive losses, and the weighted total.
struct LossReport {
  double seg_s1 = 0.0;
  double seg_s2 = 0.0;
  double ct_s1 = 0.0;
  double ct_s2 = 0.0;
  double total = 0.0;
};

double total_loss(double seg_s1, double seg_s2, double ct_s1, double ct_s2,
                  double lambda_ct);

// Segmentation loss -(1/(N*C)) * sum_n log p[n][y_n] over row-stochastic
// probabilities. Rows must sum to 1 within 1e-6.
double seg_loss(const std::vector<double>& probs, int classes,
                const std::vector<uint8_t>& labels);

// Stable variant computed from log-softmax rows. When d_logits is given it
// accumulates multiplier * d(loss)/d(logits) (the returned loss itself is
// unscaled).
double seg_loss_from_logp(const std::vector<double>& logp, int classes,
                          const std::vector<uint8_t>& labels,
                          double multiplier = 1.0, double* d_logits = nullptr);

// Batch contrastive loss between unit vectors v (one source batch) and
// their density-transferred counterparts vt:
//   L = -(1/B) sum_i log[ exp(v_i.vt_i/tau) /
//        (sum_j exp(v_i.v_j/tau) + sum_k exp(vt_i.vt_k/tau)) ]
// The denominator sums include the self terms j=i and k=i. Computed with
// log-sum-exp stabilization. Inputs must be L2-normalized within 1e-6.
// Optional outputs receive dL/dv_i and dL/dvt_i.
double contrastive_loss(const std::vector<std::vector<double>>& v,
                        const std::vector<std::vector<double>>& vt, double tau,
                        std::vector<std::vector<double>>* dv = nullptr,
                        std::vector<std::vector<double>>* dvt = nullptr);

}  // namespace bevdg
