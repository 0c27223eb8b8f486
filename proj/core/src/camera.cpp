#include "bevdg/camera.hpp"

#include <cmath>

namespace bevdg {

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("camera: focal lengths must be > 0");
  }
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw InvalidArgument("camera: principal point outside image");
  }
  if (width < 1 || height < 1) {
    throw InvalidArgument("camera: empty image");
  }
  if (pose.rotation.orthonormality_error() > 1e-9 ||
      std::abs(pose.rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidArgument("camera: rotation is not a proper rotation");
  }
}

CameraModel CameraModel::forward_default(double camera_height) {
  CameraModel cam;
  // Sensor (x fwd, y left, z up) -> camera (X right, Y down, Z fwd).
  cam.pose.rotation.m = {0, -1, 0, 0, 0, -1, 1, 0, 0};
  // Camera center sits at (0, 0, camera_height) in the sensor frame:
  // t = -R * center.
  cam.pose.translation = cam.pose.rotation.apply({0, 0, -camera_height});
  return cam;
}

ProjectionMap project_points(const std::vector<Point>& cloud,
                             const CameraModel& camera) {
  camera.validate();
  ProjectionMap map;
  for (uint32_t i = 0; i < cloud.size(); ++i) {
    const Vec3 pc = camera.pose.apply(cloud[i].position);
    if (pc.z <= 0.0) continue;
    const double u = camera.fx * pc.x / pc.z + camera.cx;
    const double v = camera.fy * pc.y / pc.z + camera.cy;
    if (u < 0.0 || u >= camera.width || v < 0.0 || v >= camera.height) {
      continue;
    }
    map.emplace(i, std::make_pair(u, v));
  }
  return map;
}

ImageGrid render_image(const World& world, const CameraModel& camera,
                       uint64_t seed) {
  camera.validate();
  Rng noise(derive_seed(seed, "image-noise"));
  const Vec3 center = camera.pose.apply_inverse({0, 0, 0});

  ImageGrid img;
  img.height = camera.height;
  img.width = camera.width;
  img.channels = kImageChannels;
  img.data.resize(static_cast<size_t>(img.height) * img.width * img.channels);
  img.labels.resize(static_cast<size_t>(img.height) * img.width);

  size_t idx = 0;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u, ++idx) {
      // Ray through the pixel center.
      const Vec3 dir_cam{(u + 0.5 - camera.cx) / camera.fx,
                         (v + 0.5 - camera.cy) / camera.fy, 1.0};
      const Vec3 dir = camera.pose.rotation.apply_transposed(dir_cam);
      const RayHit hit = raycast(world, center, dir, 1e6);

      double depth = 1.0, normal_up = 0.0, albedo = 0.0;
      uint8_t label = kBackground;
      if (hit.hit) {
        // hit.range is in units of |dir|; dir_cam has Z = 1, so the
        // camera-frame depth of the hit equals the ray parameter.
        depth = std::min(hit.range / kDepthNormalizer, 1.0);
        normal_up = std::max(0.0, hit.normal.z);
        albedo = hit.albedo;
        label = hit.label;
      }
      albedo += noise.uniform(-world.image_noise, world.image_noise);
      img.data[idx * kImageChannels + 0] = depth;
      img.data[idx * kImageChannels + 1] = normal_up;
      img.data[idx * kImageChannels + 2] = albedo;
      img.labels[idx] = label;
    }
  }
  return img;
}

}  // namespace bevdg
