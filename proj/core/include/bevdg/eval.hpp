#pragma once

#include <span>
#include <vector>

#include "bevdg/forward.hpp"
#include "bevdg/metrics.hpp"

namespace bevdg {

struct EvalScores {
  double miou_2d = 0.0;
  double miou_3d = 0.0;
  double miou_avg = 0.0;  // 2D/3D probability ensembling ("Avg")
};

// Scores a model over prepared scenes: per-point confusion matrices for
// both modalities plus the softmax-mean ensemble, micro-averaged across
// scenes.
EvalScores evaluate_prepared(const ModelParams& params,
                             std::span<const PreparedScene> scenes);

// Same, starting from raw pairs; when perturb_fraction > 0 the projection
// maps are first misaligned with the given fraction/radius. Perturbation
// only changes where 2D features are sampled; 3D geometry is untouched.
EvalScores evaluate_pairs(const ModelParams& params,
                          const std::vector<ScenePair>& pairs,
                          const GridSpec& grid, double perturb_fraction,
                          double perturb_radius_px, uint64_t seed);

}  // namespace bevdg
