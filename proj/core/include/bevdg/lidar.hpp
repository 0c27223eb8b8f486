#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevdg/common.hpp"
#include "bevdg/world.hpp"

namespace bevdg {

// A spinning-LiDAR model. The beam count is the single domain-varying knob:
// 16/32/64 beams stand in for the sparse/medium/dense dataset regimes.
//
// Elevation angles are evenly spaced with step fov/beam_count starting at
// vertical_fov_min, so the grids of 16/32/64-beam sensors sharing one
// field of view are nested: every 16-beam elevation is also a 32- and
// 64-beam elevation. Nesting makes beam decimation exact.
struct LidarConfig {
  int beam_count = 64;
  double vertical_fov_min_deg = -24.0;
  double vertical_fov_max_deg = -1.0;
  double azimuth_step_deg = 1.5;
  double max_range = 60.0;
  double sensor_height = 1.8;
  double dropout_rate = 0.0;
  std::string domain_tag = "beams64";

  void validate() const;

  // Elevation (radians) of one beam; index must be in [0, beam_count).
  double beam_elevation(int beam_id) const;
  // Number of azimuth steps in a full revolution.
  int azimuth_count() const;
  // Azimuth (radians) of one step.
  double azimuth_angle(int azimuth_id) const;
  // True when `from`'s elevation grid is a superset of this config's grid:
  // same field of view and azimuth grid, and beam counts divide evenly.
  bool nests_within(const LidarConfig& denser) const;
};

struct Point {
  Vec3 position;        // sensor frame, meters
  double intensity = 0.0;  // [0, 1]
  uint16_t beam_id = 0;
  uint8_t label = kBackground;

  bool operator==(const Point&) const = default;
};

// Casts one ray per (beam, azimuth) pair from (0, 0, sensor_height) and
// keeps the nearest surface intersection within max_range. Each return is
// then dropped independently with probability dropout_rate. Deterministic
// in (world, lidar, seed); an empty cloud is a valid result.
std::vector<Point> lidar_scan(const World& world, const LidarConfig& lidar,
                              uint64_t seed);

}  // namespace bevdg
