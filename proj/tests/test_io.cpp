#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bevdg/scene_io.hpp"
#include "test_fixtures.hpp"

using namespace bevdg;
using namespace bevdg::testing;

namespace {

struct TempStem {
  std::string stem;
  explicit TempStem(std::string s) : stem(std::move(s)) {}
  ~TempStem() {
    for (const char* ext : {".bdgc", ".bdgp", ".bdgi"}) {
      std::remove((stem + ext).c_str());
    }
  }
};

}  // namespace

TEST_CASE("scene pair round trip survives f32 narrowing consistently") {
  const ScenePair pair = tiny_pair(50, 32);
  TempStem tmp("io_test_scene");
  write_scene_pair(tmp.stem, pair);
  const ScenePair back = read_scene_pair(tmp.stem, pair.domain_tag);

  REQUIRE(back.cloud.size() == pair.cloud.size());
  REQUIRE(back.projection.size() == pair.projection.size());
  CHECK(back.domain_tag == pair.domain_tag);
  for (size_t i = 0; i < pair.cloud.size(); ++i) {
    // Values equal their f32 rounding exactly.
    CHECK(back.cloud[i].position.x ==
          static_cast<double>(static_cast<float>(pair.cloud[i].position.x)));
    CHECK(back.cloud[i].intensity ==
          static_cast<double>(static_cast<float>(pair.cloud[i].intensity)));
    CHECK(back.cloud[i].beam_id == pair.cloud[i].beam_id);
    CHECK(back.cloud[i].label == pair.cloud[i].label);
  }
  CHECK(back.image.height == pair.image.height);
  CHECK(back.image.width == pair.image.width);
  CHECK(back.image.channels == pair.image.channels);
  CHECK(back.image.labels == pair.image.labels);
  for (size_t i = 0; i < pair.image.data.size(); ++i) {
    CHECK(back.image.data[i] ==
          static_cast<double>(static_cast<float>(pair.image.data[i])));
  }
  // Reading is idempotent: a second write of the loaded pair produces
  // identical bytes (all values already f32-representable).
  TempStem tmp2("io_test_scene2");
  write_scene_pair(tmp2.stem, back);
  for (const char* ext : {".bdgc", ".bdgp", ".bdgi"}) {
    std::ifstream a(tmp.stem + ext, std::ios::binary);
    std::ifstream b(tmp2.stem + ext, std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(a)),
                         std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(b)),
                         std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
}

TEST_CASE("projection file omits absent points and preserves indices") {
  ProjectionMap map;
  map.emplace(3, std::make_pair(10.5, 20.25));
  map.emplace(17, std::make_pair(0.0, 5.0));
  const std::string path = "io_test_proj.bdgp";
  write_projection(path, map);
  const ProjectionMap back = read_projection(path);
  CHECK(back == map);  // both values f32-exact
  std::remove(path.c_str());
}

TEST_CASE("cloud header carries the paired image channel count") {
  const std::string path = "io_test_cloud.bdgc";
  std::vector<Point> cloud(2);
  cloud[0].position = {1.0, 2.0, 3.0};
  cloud[1].beam_id = 63;
  cloud[1].label = kPerson;
  write_cloud(path, cloud, 3);
  uint16_t channels = 0;
  const std::vector<Point> back = read_cloud(path, &channels);
  CHECK(channels == 3);
  CHECK(back == cloud);
  std::remove(path.c_str());
}

TEST_CASE("corrupt magic and truncation are rejected") {
  const std::string path = "io_test_bad.bdgc";
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOPE";
  }
  CHECK_THROWS_AS(read_cloud(path), IoError);
  {
    std::ofstream f(path, std::ios::binary);
    f << "BDGC";
    // Header claims a version but the stream ends.
  }
  CHECK_THROWS_AS(read_cloud(path), IoError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_cloud("does_not_exist.bdgc"), IoError);
}
