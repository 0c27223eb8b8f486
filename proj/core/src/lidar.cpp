#include "bevdg/lidar.hpp"

#include <algorithm>
#include <cmath>

namespace bevdg {

void LidarConfig::validate() const {
  if (beam_count < 1) throw InvalidArgument("lidar: beam_count must be >= 1");
  if (!(vertical_fov_min_deg < vertical_fov_max_deg)) {
    throw InvalidArgument("lidar: vertical_fov min must be < max");
  }
  if (!(azimuth_step_deg > 0.0)) {
    throw InvalidArgument("lidar: azimuth_step must be > 0");
  }
  if (!(max_range > 0.0)) throw InvalidArgument("lidar: max_range must be > 0");
  if (dropout_rate < 0.0 || dropout_rate > 1.0) {
    throw InvalidArgument("lidar: dropout_rate must be in [0,1]");
  }
}

double LidarConfig::beam_elevation(int beam_id) const {
  // Step fov/beam_count anchored at the lower bound. Multiplying before
  // dividing keeps nested grids bit-identical across beam counts.
  const double fov = vertical_fov_max_deg - vertical_fov_min_deg;
  return (vertical_fov_min_deg + beam_id * fov / beam_count) * kDegToRad;
}

int LidarConfig::azimuth_count() const {
  return static_cast<int>(std::floor(360.0 / azimuth_step_deg));
}

double LidarConfig::azimuth_angle(int azimuth_id) const {
  return azimuth_id * azimuth_step_deg * kDegToRad;
}

bool LidarConfig::nests_within(const LidarConfig& denser) const {
  return vertical_fov_min_deg == denser.vertical_fov_min_deg &&
         vertical_fov_max_deg == denser.vertical_fov_max_deg &&
         azimuth_step_deg == denser.azimuth_step_deg &&
         denser.beam_count % beam_count == 0;
}

std::vector<Point> lidar_scan(const World& world, const LidarConfig& lidar,
                              uint64_t seed) {
  lidar.validate();
  Rng drop_rng(derive_seed(seed, "lidar-dropout"));
  const Vec3 origin{0.0, 0.0, lidar.sensor_height};
  const int azimuths = lidar.azimuth_count();

  std::vector<Point> cloud;
  cloud.reserve(static_cast<size_t>(lidar.beam_count) * azimuths / 4);
  for (int beam = 0; beam < lidar.beam_count; ++beam) {
    const double elev = lidar.beam_elevation(beam);
    const double ce = std::cos(elev), se = std::sin(elev);
    for (int az = 0; az < azimuths; ++az) {
      const double phi = lidar.azimuth_angle(az);
      const Vec3 dir{ce * std::cos(phi), ce * std::sin(phi), se};
      const RayHit hit = raycast(world, origin, dir, lidar.max_range);
      if (!hit.hit) continue;
      if (lidar.dropout_rate > 0.0 &&
          drop_rng.uniform() < lidar.dropout_rate) {
        continue;
      }
      Point p;
      p.position = hit.point;
      // Reflectance falls off mildly with range; no noise so that beam
      // decimation reproduces a sparser scan exactly.
      p.intensity = std::clamp(
          hit.albedo * (1.0 - 0.5 * hit.range / lidar.max_range), 0.0, 1.0);
      p.beam_id = static_cast<uint16_t>(beam);
      p.label = hit.label;
      cloud.push_back(p);
    }
  }
  return cloud;
}

}  // namespace bevdg
