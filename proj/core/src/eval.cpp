#include "bevdg/eval.hpp"

namespace bevdg {

EvalScores evaluate_prepared(const ModelParams& params,
                             std::span<const PreparedScene> scenes) {
  ConfusionMatrix conf2d, conf3d, confavg;
  const int classes = params.config.num_classes;
  for (const PreparedScene& scene : scenes) {
    const ForwardTrace t = forward_scene(scene, params);
    const std::vector<double> p2 = probs_from_logp(t.logp2d);
    const std::vector<double> p3 = probs_from_logp(t.logp3d);
    const std::vector<double> pa = ensemble_avg(p2, p3);
    const std::vector<uint8_t> a2 = argmax_rows(p2, classes);
    const std::vector<uint8_t> a3 = argmax_rows(p3, classes);
    const std::vector<uint8_t> aa = argmax_rows(pa, classes);
    for (int i = 0; i < scene.n; ++i) {
      conf2d.add(scene.labels[i], a2[i]);
      conf3d.add(scene.labels[i], a3[i]);
      confavg.add(scene.labels[i], aa[i]);
    }
  }
  return EvalScores{miou(conf2d).mean, miou(conf3d).mean, miou(confavg).mean};
}

EvalScores evaluate_pairs(const ModelParams& params,
                          const std::vector<ScenePair>& pairs,
                          const GridSpec& grid, double perturb_fraction,
                          double perturb_radius_px, uint64_t seed) {
  std::vector<PreparedScene> prepared;
  prepared.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (perturb_fraction > 0.0) {
      ScenePair p = pairs[i];
      p.projection = perturb_projections(
          p.projection, perturb_fraction, perturb_radius_px, p.image.width,
          p.image.height, derive_seed(seed, "eval-perturb", i));
      prepared.push_back(prepare_scene(p, grid, params.config));
    } else {
      prepared.push_back(prepare_scene(pairs[i], grid, params.config));
    }
  }
  return evaluate_prepared(params, prepared);
}

}  // namespace bevdg
