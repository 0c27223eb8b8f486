#include <doctest.h>

#include <cmath>

#include "bevdg/common.hpp"

using namespace bevdg;

TEST_CASE("rng is deterministic and uniform draws stay in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("uniform_below covers the full range without escaping it") {
  Rng rng(7);
  bool seen[10] = {};
  for (int i = 0; i < 5000; ++i) {
    const uint64_t v = rng.uniform_below(10);
    REQUIRE(v < 10);
    seen[v] = true;
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("uniform_disk stays inside the radius") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    double dx, dy;
    rng.uniform_disk(5.0, &dx, &dy);
    CHECK(std::sqrt(dx * dx + dy * dy) <= 5.0 + 1e-12);
  }
}

TEST_CASE("derive_seed separates stages and indices") {
  const uint64_t base = 99;
  CHECK(derive_seed(base, "a") == derive_seed(base, "a"));
  CHECK(derive_seed(base, "a") != derive_seed(base, "b"));
  CHECK(derive_seed(base, "a", 0) != derive_seed(base, "a", 1));
  CHECK(derive_seed(base, "a") != derive_seed(base + 1, "a"));
}
