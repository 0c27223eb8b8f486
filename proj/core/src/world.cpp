#include "bevdg/world.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace bevdg {

double class_albedo(int label) {
  switch (label) {
    case kCar: return 0.75;
    case kTruck: return 0.55;
    case kBike: return 0.38;
    case kPerson: return 0.22;
    default: return 0.08;
  }
}

std::string World::describe() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "ground %.9g %.9g %.9g %.9g albedo %.9g\n",
                ground_x_min, ground_x_max, ground_y_min, ground_y_max,
                ground_albedo);
  out += line;
  for (const Box& b : boxes) {
    std::snprintf(line, sizeof(line),
                  "box %s min %.9g %.9g %.9g max %.9g %.9g %.9g albedo %.9g\n",
                  class_name(b.label), b.min.x, b.min.y, b.min.z, b.max.x,
                  b.max.y, b.max.z, b.albedo);
    out += line;
  }
  for (const Cylinder& c : cylinders) {
    std::snprintf(line, sizeof(line),
                  "cylinder %s center %.9g %.9g r %.9g h %.9g albedo %.9g\n",
                  class_name(c.label), c.cx, c.cy, c.radius, c.height,
                  c.albedo);
    out += line;
  }
  return out;
}

namespace {

struct SizeRange {
  double len_min, len_max;   // along x
  double wid_min, wid_max;   // along y
  double hgt_min, hgt_max;
};

SizeRange box_size_range(int label) {
  switch (label) {
    case kCar: return {3.5, 4.7, 1.6, 2.0, 1.3, 1.6};
    case kTruck: return {6.0, 9.0, 2.2, 2.6, 2.5, 3.5};
    default: return {1.5, 2.0, 0.4, 0.7, 1.0, 1.4};  // bike
  }
}

void place_boxes(Rng& rng, const WorldSpec& spec, int count, uint8_t label,
                 std::vector<Box>* out) {
  const SizeRange r = box_size_range(label);
  for (int i = 0; i < count; ++i) {
    const double cx = rng.uniform(spec.place_x_min, spec.place_x_max);
    const double cy = rng.uniform(spec.place_y_min, spec.place_y_max);
    const double len = rng.uniform(r.len_min, r.len_max);
    const double wid = rng.uniform(r.wid_min, r.wid_max);
    const double hgt = rng.uniform(r.hgt_min, r.hgt_max);
    const double albedo = std::clamp(
        class_albedo(label) +
            rng.uniform(-spec.albedo_jitter, spec.albedo_jitter),
        0.01, 1.0);
    out->push_back(Box{{cx - len / 2, cy - wid / 2, 0.0},
                       {cx + len / 2, cy + wid / 2, hgt},
                       label,
                       albedo});
  }
}

}  // namespace

World generate_world(uint64_t seed, const WorldSpec& spec) {
  if (spec.ground_x_max <= spec.ground_x_min ||
      spec.ground_y_max <= spec.ground_y_min) {
    throw InvalidArgument("generate_world: degenerate ground extent");
  }
  if (spec.place_x_max <= spec.place_x_min ||
      spec.place_y_max <= spec.place_y_min) {
    throw InvalidArgument("generate_world: degenerate placement extent");
  }
  if (spec.num_cars < 0 || spec.num_trucks < 0 || spec.num_bikes < 0 ||
      spec.num_persons < 0) {
    throw InvalidArgument("generate_world: negative object count");
  }

  Rng rng(derive_seed(seed, "world"));
  World w;
  w.ground_x_min = spec.ground_x_min;
  w.ground_x_max = spec.ground_x_max;
  w.ground_y_min = spec.ground_y_min;
  w.ground_y_max = spec.ground_y_max;
  w.image_noise = spec.image_noise;

  place_boxes(rng, spec, spec.num_cars, kCar, &w.boxes);
  place_boxes(rng, spec, spec.num_trucks, kTruck, &w.boxes);
  place_boxes(rng, spec, spec.num_bikes, kBike, &w.boxes);
  for (int i = 0; i < spec.num_persons; ++i) {
    Cylinder c;
    c.cx = rng.uniform(spec.place_x_min, spec.place_x_max);
    c.cy = rng.uniform(spec.place_y_min, spec.place_y_max);
    c.radius = rng.uniform(0.25, 0.35);
    c.height = rng.uniform(1.5, 1.9);
    c.label = kPerson;
    c.albedo = std::clamp(
        class_albedo(kPerson) +
            rng.uniform(-spec.albedo_jitter, spec.albedo_jitter),
        0.01, 1.0);
    w.cylinders.push_back(c);
  }
  return w;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ground rectangle at z = 0.
bool hit_ground(const World& w, const Vec3& o, const Vec3& d, double* t,
                Vec3* normal) {
  if (d.z == 0.0) return false;
  const double tc = -o.z / d.z;
  if (tc <= 0.0) return false;
  const double x = o.x + tc * d.x;
  const double y = o.y + tc * d.y;
  if (x < w.ground_x_min || x > w.ground_x_max || y < w.ground_y_min ||
      y > w.ground_y_max) {
    return false;
  }
  *t = tc;
  *normal = {0.0, 0.0, 1.0};
  return true;
}

// Slab test. Returns entry parameter and the normal of the entered face.
bool hit_box(const Box& b, const Vec3& o, const Vec3& d, double* t,
             Vec3* normal) {
  double tmin = 0.0, tmax = kInf;
  int axis = -1;
  double sign = 0.0;
  const double od[3] = {o.x, o.y, o.z};
  const double dd[3] = {d.x, d.y, d.z};
  const double lo[3] = {b.min.x, b.min.y, b.min.z};
  const double hi[3] = {b.max.x, b.max.y, b.max.z};
  for (int a = 0; a < 3; ++a) {
    if (dd[a] == 0.0) {
      if (od[a] < lo[a] || od[a] > hi[a]) return false;
      continue;
    }
    double t0 = (lo[a] - od[a]) / dd[a];
    double t1 = (hi[a] - od[a]) / dd[a];
    double s = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      s = 1.0;
    }
    if (t0 > tmin) {
      tmin = t0;
      axis = a;
      sign = s;
    }
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  if (axis < 0 || tmin <= 0.0) return false;  // origin inside or behind
  *t = tmin;
  *normal = {0.0, 0.0, 0.0};
  if (axis == 0) normal->x = sign;
  if (axis == 1) normal->y = sign;
  if (axis == 2) normal->z = sign;
  return true;
}

// Capped vertical cylinder: lateral surface plus top cap.
bool hit_cylinder(const Cylinder& c, const Vec3& o, const Vec3& d, double* t,
                  Vec3* normal) {
  double best = kInf;
  Vec3 best_n;
  // Lateral: |(o.xy + t*d.xy) - c| = r
  const double ox = o.x - c.cx, oy = o.y - c.cy;
  const double a = d.x * d.x + d.y * d.y;
  if (a > 0.0) {
    const double bq = ox * d.x + oy * d.y;
    const double cq = ox * ox + oy * oy - c.radius * c.radius;
    const double disc = bq * bq - a * cq;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      for (double tc : {(-bq - root) / a, (-bq + root) / a}) {
        if (tc <= 0.0 || tc >= best) continue;
        const double z = o.z + tc * d.z;
        if (z < 0.0 || z > c.height) continue;
        best = tc;
        best_n = Vec3{ox + tc * d.x, oy + tc * d.y, 0.0}.normalized();
      }
    }
  }
  // Top cap at z = height.
  if (d.z != 0.0) {
    const double tc = (c.height - o.z) / d.z;
    if (tc > 0.0 && tc < best) {
      const double x = o.x + tc * d.x - c.cx;
      const double y = o.y + tc * d.y - c.cy;
      if (x * x + y * y <= c.radius * c.radius) {
        best = tc;
        best_n = {0.0, 0.0, 1.0};
      }
    }
  }
  if (best == kInf) return false;
  *t = best;
  *normal = best_n;
  return true;
}

}  // namespace

RayHit raycast(const World& world, const Vec3& origin, const Vec3& dir,
               double max_range) {
  RayHit hit;
  double best = max_range;
  double t;
  Vec3 n;
  if (hit_ground(world, origin, dir, &t, &n) && t <= best) {
    best = t;
    hit = {true, t, origin + dir * t, n, kBackground, world.ground_albedo};
  }
  for (const Box& b : world.boxes) {
    if (hit_box(b, origin, dir, &t, &n) && t <= best) {
      best = t;
      hit = {true, t, origin + dir * t, n, b.label, b.albedo};
    }
  }
  for (const Cylinder& c : world.cylinders) {
    if (hit_cylinder(c, origin, dir, &t, &n) && t <= best) {
      best = t;
      hit = {true, t, origin + dir * t, n, c.label, c.albedo};
    }
  }
  return hit;
}

}  // namespace bevdg
