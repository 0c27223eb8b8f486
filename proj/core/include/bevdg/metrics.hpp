#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bevdg/common.hpp"

namespace bevdg {

// Rows are ground truth, columns predictions.
struct ConfusionMatrix {
  std::array<uint64_t, kNumClasses * kNumClasses> m{};

  void add(int truth, int pred) { m[truth * kNumClasses + pred]++; }
  uint64_t at(int truth, int pred) const { return m[truth * kNumClasses + pred]; }
  uint64_t total() const;
  void merge(const ConfusionMatrix& other);
};

struct IouReport {
  std::array<double, kNumClasses> per_class{};
  std::array<bool, kNumClasses> valid{};  // class has nonzero union
  double mean = 0.0;
};

// IoU_c = TP / (TP + FP + FN); classes with zero union are excluded from
// the mean. Throws InvalidArgument on an empty matrix.
IouReport miou(const ConfusionMatrix& conf);

// Elementwise mean of two row-stochastic probability matrices; rows stay
// normalized exactly.
std::vector<double> ensemble_avg(const std::vector<double>& probs2d,
                                 const std::vector<double>& probs3d);

// Argmax class of each probability row, ties toward the lowest class id.
std::vector<uint8_t> argmax_rows(const std::vector<double>& probs,
                                 int classes);

}  // namespace bevdg
