#include "bevdg/metrics.hpp"

namespace bevdg {

uint64_t ConfusionMatrix::total() const {
  uint64_t t = 0;
  for (uint64_t v : m) t += v;
  return t;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  for (size_t i = 0; i < m.size(); ++i) m[i] += other.m[i];
}

IouReport miou(const ConfusionMatrix& conf) {
  if (conf.total() == 0) {
    throw InvalidArgument("miou: empty confusion matrix");
  }
  IouReport r;
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const uint64_t tp = conf.at(c, c);
    uint64_t fp = 0, fn = 0;
    for (int o = 0; o < kNumClasses; ++o) {
      if (o == c) continue;
      fp += conf.at(o, c);
      fn += conf.at(c, o);
    }
    const uint64_t uni = tp + fp + fn;
    if (uni == 0) continue;
    r.valid[c] = true;
    r.per_class[c] = static_cast<double>(tp) / static_cast<double>(uni);
    sum += r.per_class[c];
    ++counted;
  }
  r.mean = counted > 0 ? sum / counted : 0.0;
  return r;
}

std::vector<double> ensemble_avg(const std::vector<double>& probs2d,
                                 const std::vector<double>& probs3d) {
  if (probs2d.size() != probs3d.size()) {
    throw InvalidArgument("ensemble_avg: shape mismatch");
  }
  std::vector<double> out(probs2d.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * (probs2d[i] + probs3d[i]);
  }
  return out;
}

std::vector<uint8_t> argmax_rows(const std::vector<double>& probs,
                                 int classes) {
  const size_t n = probs.size() / classes;
  std::vector<uint8_t> out(n);
  for (size_t i = 0; i < n; ++i) {
    const double* row = &probs[i * classes];
    int best = 0;
    for (int c = 1; c < classes; ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[i] = static_cast<uint8_t>(best);
  }
  return out;
}

}  // namespace bevdg
