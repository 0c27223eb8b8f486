#include "bevdg/scene.hpp"

#include <algorithm>
#include <cmath>

namespace bevdg {

void ScenePair::validate_projection_bounds() const {
  for (const auto& [idx, uv] : projection) {
    if (idx >= cloud.size()) {
      throw InvalidArgument("scene: projection index out of range");
    }
    if (uv.first < 0.0 || uv.first >= image.width || uv.second < 0.0 ||
        uv.second >= image.height) {
      throw InvalidArgument("scene: projected pixel out of bounds");
    }
  }
}

ScenePair make_scene_pair(const World& world, const LidarConfig& lidar,
                          const CameraModel& camera, uint64_t seed) {
  const std::vector<Point> scan =
      lidar_scan(world, lidar, derive_seed(seed, "scan"));
  const ProjectionMap full = project_points(scan, camera);
  if (full.empty()) {
    throw InvalidArgument("make_scene_pair: no point projects into the image");
  }

  ScenePair pair;
  pair.domain_tag = lidar.domain_tag;
  pair.cloud.reserve(full.size());
  for (const auto& [idx, uv] : full) {
    pair.cloud.push_back(scan[idx]);
    pair.projection.emplace(static_cast<uint32_t>(pair.cloud.size() - 1), uv);
  }
  pair.image = render_image(world, camera, derive_seed(seed, "render"));
  return pair;
}

ProjectionMap perturb_projections(const ProjectionMap& map, double fraction,
                                  double radius_px, int image_width,
                                  int image_height, uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw InvalidArgument("perturb_projections: fraction must be in [0,1]");
  }
  if (radius_px < 0.0) {
    throw InvalidArgument("perturb_projections: radius must be >= 0");
  }

  const size_t total = map.size();
  const size_t count =
      static_cast<size_t>(std::ceil(fraction * static_cast<double>(total)));

  std::vector<uint32_t> keys;
  keys.reserve(total);
  for (const auto& [idx, uv] : map) keys.push_back(idx);

  // Partial Fisher-Yates: the first `count` slots are a uniform subset.
  Rng rng(derive_seed(seed, "perturb"));
  for (size_t i = 0; i + 1 < total && i < count; ++i) {
    const size_t j = i + rng.uniform_below(total - i);
    std::swap(keys[i], keys[j]);
  }

  // Clamp margin keeps every stored pixel strictly inside the image even
  // after narrowing to f32 on disk.
  const double margin = 1e-3;
  ProjectionMap out = map;
  for (size_t i = 0; i < count; ++i) {
    double dx, dy;
    rng.uniform_disk(radius_px, &dx, &dy);
    auto& uv = out.at(keys[i]);
    uv.first = std::clamp(uv.first + dx, 0.0, image_width - margin);
    uv.second = std::clamp(uv.second + dy, 0.0, image_height - margin);
  }
  return out;
}

}  // namespace bevdg
