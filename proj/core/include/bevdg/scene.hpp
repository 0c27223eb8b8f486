#pragma once

#include <string>
#include <vector>

#include "bevdg/camera.hpp"
#include "bevdg/lidar.hpp"

namespace bevdg {

// One paired training/eval sample: a labeled point cloud, the rendered
// camera image and the point-to-pixel projection map. Invariant: the map
// covers exactly the points with positive camera depth whose pixel lies
// inside the image, and every stored pixel is in bounds.
struct ScenePair {
  std::vector<Point> cloud;
  ImageGrid image;
  ProjectionMap projection;
  std::string domain_tag;

  void validate_projection_bounds() const;
};

// Scans the world, keeps only the points that project into the camera
// image (the same front-camera restriction every domain uses), renders the
// image and assembles the pair. Throws InvalidArgument when no point
// survives the camera filter.
ScenePair make_scene_pair(const World& world, const LidarConfig& lidar,
                          const CameraModel& camera, uint64_t seed);

// Displaces a seeded, uniformly chosen ceil(fraction * |map|) subset of
// projection entries by offsets drawn uniformly from the disk of the given
// pixel radius, clamped to image bounds. fraction must be in [0,1].
ProjectionMap perturb_projections(const ProjectionMap& map, double fraction,
                                  double radius_px, int image_width,
                                  int image_height, uint64_t seed);

}  // namespace bevdg
