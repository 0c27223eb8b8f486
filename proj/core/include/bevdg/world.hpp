#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevdg/common.hpp"
#include "bevdg/geometry.hpp"

namespace bevdg {

// Axis-aligned box resting on the ground plane.
struct Box {
  Vec3 min;  // min.z == 0
  Vec3 max;
  uint8_t label = 0;
  double albedo = 0.5;

  bool operator==(const Box&) const = default;
};

// Vertical capped cylinder resting on the ground plane.
struct Cylinder {
  double cx = 0.0, cy = 0.0;
  double radius = 0.3;
  double height = 1.7;
  uint8_t label = 0;
  double albedo = 0.5;

  bool operator==(const Cylinder&) const = default;
};

// Parameters for the synthetic world generator. The ground rectangle spans
// [ground_x_min, ground_x_max] x [ground_y_min, ground_y_max] at z = 0;
// objects are placed uniformly inside the placement rectangle, which keeps
// them in front of the sensor where the camera can see them.
struct WorldSpec {
  double ground_x_min = -5.0, ground_x_max = 45.0;
  double ground_y_min = -25.0, ground_y_max = 25.0;
  double place_x_min = 4.0, place_x_max = 28.0;
  double place_y_min = -12.0, place_y_max = 12.0;
  int num_cars = 6;
  int num_trucks = 3;
  int num_bikes = 4;
  int num_persons = 5;
  // Spread of the per-object albedo jitter around the class base value.
  // Nonzero jitter makes reflectance overlap between classes, so local
  // appearance alone does not identify the class.
  double albedo_jitter = 0.25;
  // Amplitude of the uniform per-pixel noise on the rendered albedo
  // channel.
  double image_noise = 0.04;
};

struct World {
  double ground_x_min = 0.0, ground_x_max = 0.0;
  double ground_y_min = 0.0, ground_y_max = 0.0;
  double ground_albedo = 0.08;
  double image_noise = 0.04;
  std::vector<Box> boxes;
  std::vector<Cylinder> cylinders;

  bool operator==(const World&) const = default;

  // Stable text dump, used for serialization-level comparisons.
  std::string describe() const;
};

// Base reflectance per class; objects jitter around these.
double class_albedo(int label);

// Deterministic synthetic world: ground plane plus labeled boxes/cylinders.
// Identical (seed, spec) pairs produce bit-identical worlds. Throws
// InvalidArgument on degenerate (zero-area) extents or negative counts.
World generate_world(uint64_t seed, const WorldSpec& spec);

// Nearest ray hit against the world, or miss.
struct RayHit {
  bool hit = false;
  double range = 0.0;
  Vec3 point;
  Vec3 normal;
  uint8_t label = kBackground;
  double albedo = 0.0;
};

// Nearest intersection of the ray origin + t*dir (t in (0, max_range])
// with any world surface. dir need not be unit length; range is reported
// in units of |dir|.
RayHit raycast(const World& world, const Vec3& origin, const Vec3& dir,
               double max_range);

}  // namespace bevdg
