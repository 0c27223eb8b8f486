#include "bevdg/losses.hpp"

#include <algorithm>
#include <cmath>

#include "bevdg/common.hpp"

namespace bevdg {

double total_loss(double seg_s1, double seg_s2, double ct_s1, double ct_s2,
                  double lambda_ct) {
  return seg_s1 + seg_s2 + lambda_ct * (ct_s1 + ct_s2);
}

double seg_loss(const std::vector<double>& probs, int classes,
                const std::vector<uint8_t>& labels) {
  const size_t n = labels.size();
  if (probs.size() != n * static_cast<size_t>(classes)) {
    throw InvalidArgument("seg_loss: probs/labels shape mismatch");
  }
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* row = &probs[i * classes];
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += row[c];
    if (std::abs(sum - 1.0) > 1e-6) {
      throw InvalidArgument("seg_loss: probability row does not sum to 1");
    }
    loss -= std::log(row[labels[i]]);
  }
  return loss / (static_cast<double>(n) * classes);
}

double seg_loss_from_logp(const std::vector<double>& logp, int classes,
                          const std::vector<uint8_t>& labels,
                          double multiplier, double* d_logits) {
  const size_t n = labels.size();
  if (logp.size() != n * static_cast<size_t>(classes)) {
    throw InvalidArgument("seg_loss_from_logp: shape mismatch");
  }
  const double scale = 1.0 / (static_cast<double>(n) * classes);
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double* row = &logp[i * classes];
    loss -= row[labels[i]];
    if (d_logits) {
      // d/d logits of -log softmax[y]: p - onehot(y).
      double* g = &d_logits[i * classes];
      for (int c = 0; c < classes; ++c) {
        g[c] += multiplier * scale *
                (std::exp(row[c]) - (c == labels[i] ? 1.0 : 0.0));
      }
    }
  }
  return loss * scale;
}

double contrastive_loss(const std::vector<std::vector<double>>& v,
                        const std::vector<std::vector<double>>& vt, double tau,
                        std::vector<std::vector<double>>* dv,
                        std::vector<std::vector<double>>* dvt) {
  const size_t b = v.size();
  if (b == 0 || vt.size() != b) {
    throw InvalidArgument("contrastive_loss: batch sizes must match, B >= 1");
  }
  if (!(tau > 0.0)) throw InvalidArgument("contrastive_loss: tau must be > 0");
  const size_t dim = v[0].size();
  for (const auto* batch : {&v, &vt}) {
    for (const auto& vec : *batch) {
      if (vec.size() != dim) {
        throw InvalidArgument("contrastive_loss: dimension mismatch");
      }
      double sq = 0.0;
      for (double x : vec) sq += x * x;
      if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
        throw InvalidArgument("contrastive_loss: input vector not unit norm");
      }
    }
  }

  auto dot = [dim](const std::vector<double>& a, const std::vector<double>& b2) {
    double s = 0.0;
    for (size_t c = 0; c < dim; ++c) s += a[c] * b2[c];
    return s;
  };

  // Pairwise similarity logits.
  std::vector<double> sv(b * b), st(b * b), pos(b);
  for (size_t i = 0; i < b; ++i) {
    for (size_t j = 0; j < b; ++j) {
      sv[i * b + j] = dot(v[i], v[j]) / tau;
      st[i * b + j] = dot(vt[i], vt[j]) / tau;
    }
    pos[i] = dot(v[i], vt[i]) / tau;
  }

  if (dv) dv->assign(b, std::vector<double>(dim, 0.0));
  if (dvt) dvt->assign(b, std::vector<double>(dim, 0.0));

  double loss = 0.0;
  // Softmax weights of each denominator row, for the gradient.
  std::vector<double> wv(b * b), wt(b * b);
  for (size_t i = 0; i < b; ++i) {
    double m = sv[i * b];
    for (size_t j = 0; j < b; ++j) {
      m = std::max(m, sv[i * b + j]);
      m = std::max(m, st[i * b + j]);
    }
    double denom = 0.0;
    for (size_t j = 0; j < b; ++j) {
      wv[i * b + j] = std::exp(sv[i * b + j] - m);
      wt[i * b + j] = std::exp(st[i * b + j] - m);
      denom += wv[i * b + j] + wt[i * b + j];
    }
    const double log_denom = m + std::log(denom);
    loss += log_denom - pos[i];
    for (size_t j = 0; j < b; ++j) {
      wv[i * b + j] /= denom;
      wt[i * b + j] /= denom;
    }
  }
  loss /= static_cast<double>(b);

  if (dv || dvt) {
    const double scale = 1.0 / (static_cast<double>(b) * tau);
    for (size_t m = 0; m < b; ++m) {
      for (size_t c = 0; c < dim; ++c) {
        if (dv) {
          // -(1/(B tau)) [ vt_m - sum_j W^v_mj v_j - sum_i W^v_im v_i ]
          double acc = vt[m][c];
          for (size_t j = 0; j < b; ++j) acc -= wv[m * b + j] * v[j][c];
          for (size_t i = 0; i < b; ++i) acc -= wv[i * b + m] * v[i][c];
          (*dv)[m][c] = -scale * acc;
        }
        if (dvt) {
          double acc = v[m][c];
          for (size_t k = 0; k < b; ++k) acc -= wt[m * b + k] * vt[k][c];
          for (size_t i = 0; i < b; ++i) acc -= wt[i * b + m] * vt[i][c];
          (*dvt)[m][c] = -scale * acc;
        }
      }
    }
  }
  return loss;
}

}  // namespace bevdg
