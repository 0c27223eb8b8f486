#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bevdg/geometry.hpp"
#include "bevdg/lidar.hpp"
#include "bevdg/world.hpp"

namespace bevdg {

// Pinhole camera. `pose` maps sensor-frame coordinates (x forward, y left,
// z up) into camera-frame coordinates (X right, Y down, Z forward).
struct CameraModel {
  double fx = 260.0, fy = 260.0;
  double cx = 160.0, cy = 120.0;
  int width = 320, height = 240;
  RigidTransform pose;

  // Rotation orthonormality is checked to 1e-9.
  void validate() const;

  // A forward-looking camera at the given height above the ground.
  static CameraModel forward_default(double camera_height = 1.6);
};

// Point-index -> continuous pixel coordinates (u along width, v along
// height). std::map keeps iteration in ascending point order, which every
// seeded algorithm below relies on.
using ProjectionMap = std::map<uint32_t, std::pair<double, double>>;

// Standard pinhole projection of a cloud: camera-frame depth must be > 0
// and the pixel must fall inside the image. Injective point -> pixel.
ProjectionMap project_points(const std::vector<Point>& cloud,
                             const CameraModel& camera);

// Rendered camera image: `channels` raw feature channels per pixel plus a
// semantic label per pixel. Channel layout: 0 = normalized depth,
// 1 = upward component of the surface normal, 2 = albedo with seeded noise.
struct ImageGrid {
  int height = 0, width = 0, channels = 0;
  std::vector<double> data;    // height*width*channels, row-major
  std::vector<uint8_t> labels; // height*width

  double at(int v, int u, int c) const {
    return data[(static_cast<size_t>(v) * width + u) * channels + c];
  }
  uint8_t label_at(int v, int u) const {
    return labels[static_cast<size_t>(v) * width + u];
  }
};

inline constexpr int kImageChannels = 3;
// Depth channel normalizer (meters).
inline constexpr double kDepthNormalizer = 50.0;

// Per-pixel raycast through the pinhole model. Deterministic in
// (world, camera, seed); the seed drives only the albedo noise.
ImageGrid render_image(const World& world, const CameraModel& camera,
                       uint64_t seed);

}  // namespace bevdg
