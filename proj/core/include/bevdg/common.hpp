#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bevdg {

// Shared semantic classes across all synthetic domains.
enum ClassId : uint8_t {
  kCar = 0,
  kTruck = 1,
  kBike = 2,
  kPerson = 3,
  kBackground = 4,
};
inline constexpr int kNumClasses = 5;

const char* class_name(int id);

// Deterministic seeded RNG. All randomness in the library flows through
// this wrapper so that results are bit-identical across runs and platforms:
// the engine (mt19937_64) is fully specified by the standard and every
// distribution below is implemented by hand instead of relying on
// implementation-defined <random> distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  // Uniform point in the closed disk of the given radius (polar sampling).
  void uniform_disk(double radius, double* dx, double* dy);

 private:
  std::mt19937_64 engine_;
};

// Derives a per-stage sub-seed from a base seed, a stage tag and an index.
// This is the documented seed-derivation scheme: every pipeline stage mixes
// the run seed with its own name so stages stay statistically independent
// while the whole run remains a function of one seed.
uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index = 0);

// Thrown when an input violates an operation contract.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a numeric computation produces NaN/Inf.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on file I/O or format problems.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bevdg
