#include "bevdg/common.hpp"

#include <cmath>
#include <numbers>

namespace bevdg {

const char* class_name(int id) {
  switch (id) {
    case kCar: return "car";
    case kTruck: return "truck";
    case kBike: return "bike";
    case kPerson: return "person";
    case kBackground: return "background";
    default: return "invalid";
  }
}

void Rng::uniform_disk(double radius, double* dx, double* dy) {
  const double r = radius * std::sqrt(uniform());
  const double theta = 2.0 * std::numbers::pi * uniform();
  *dx = r * std::cos(theta);
  *dy = r * std::sin(theta);
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index) {
  // FNV-1a over the tag, then two splitmix64 finalization rounds.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(base ^ h) ^ index);
}

}  // namespace bevdg
