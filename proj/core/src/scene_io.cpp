#include "bevdg/scene_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "bevdg/io_util.hpp"

namespace bevdg {

void write_cloud(const std::string& path, const std::vector<Point>& cloud,
                 uint16_t image_channels) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  io::write_magic(f, "BDGC");
  io::write_u16(f, 1);
  io::write_u32(f, static_cast<uint32_t>(cloud.size()));
  io::write_u16(f, image_channels);
  for (const Point& p : cloud) {
    io::write_f32(f, static_cast<float>(p.position.x));
    io::write_f32(f, static_cast<float>(p.position.y));
    io::write_f32(f, static_cast<float>(p.position.z));
    io::write_f32(f, static_cast<float>(p.intensity));
    io::write_u16(f, p.beam_id);
    io::write_u8(f, p.label);
  }
  if (!f) throw IoError("write failed: " + path);
}

std::vector<Point> read_cloud(const std::string& path,
                              uint16_t* image_channels) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  io::expect_magic(f, "BDGC", path);
  io::expect_version(f, 1, path);
  const uint32_t n = io::read_u32(f);
  const uint16_t fimg = io::read_u16(f);
  if (image_channels) *image_channels = fimg;
  std::vector<Point> cloud(n);
  for (Point& p : cloud) {
    p.position.x = io::read_f32(f);
    p.position.y = io::read_f32(f);
    p.position.z = io::read_f32(f);
    p.intensity = io::read_f32(f);
    p.beam_id = io::read_u16(f);
    p.label = io::read_u8(f);
  }
  if (!f) throw IoError("truncated cloud file: " + path);
  return cloud;
}

void write_projection(const std::string& path, const ProjectionMap& map) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  io::write_magic(f, "BDGP");
  io::write_u16(f, 1);
  io::write_u32(f, static_cast<uint32_t>(map.size()));
  for (const auto& [idx, uv] : map) {
    io::write_u32(f, idx);
    io::write_f32(f, static_cast<float>(uv.first));
    io::write_f32(f, static_cast<float>(uv.second));
  }
  if (!f) throw IoError("write failed: " + path);
}

ProjectionMap read_projection(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  io::expect_magic(f, "BDGP", path);
  io::expect_version(f, 1, path);
  const uint32_t n = io::read_u32(f);
  ProjectionMap map;
  for (uint32_t i = 0; i < n; ++i) {
    const uint32_t idx = io::read_u32(f);
    const double u = io::read_f32(f);
    const double v = io::read_f32(f);
    map.emplace(idx, std::make_pair(u, v));
  }
  if (!f) throw IoError("truncated projection file: " + path);
  return map;
}

void write_image(const std::string& path, const ImageGrid& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  io::write_magic(f, "BDGI");
  io::write_u16(f, 1);
  io::write_u16(f, static_cast<uint16_t>(image.height));
  io::write_u16(f, static_cast<uint16_t>(image.width));
  io::write_u16(f, static_cast<uint16_t>(image.channels));
  for (double v : image.data) io::write_f32(f, static_cast<float>(v));
  f.write(reinterpret_cast<const char*>(image.labels.data()),
          static_cast<std::streamsize>(image.labels.size()));
  if (!f) throw IoError("write failed: " + path);
}

ImageGrid read_image(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  io::expect_magic(f, "BDGI", path);
  io::expect_version(f, 1, path);
  ImageGrid img;
  img.height = io::read_u16(f);
  img.width = io::read_u16(f);
  img.channels = io::read_u16(f);
  const size_t pixels = static_cast<size_t>(img.height) * img.width;
  img.data.resize(pixels * img.channels);
  for (double& v : img.data) v = io::read_f32(f);
  img.labels.resize(pixels);
  f.read(reinterpret_cast<char*>(img.labels.data()),
         static_cast<std::streamsize>(pixels));
  if (!f) throw IoError("truncated image file: " + path);
  return img;
}

void write_scene_pair(const std::string& stem, const ScenePair& pair) {
  write_cloud(stem + ".bdgc", pair.cloud,
              static_cast<uint16_t>(pair.image.channels));
  // Nudge f32-rounded pixels back inside the image so the in-bounds
  // invariant survives the double -> f32 narrowing.
  ProjectionMap safe = pair.projection;
  for (auto& [idx, uv] : safe) {
    float u = static_cast<float>(uv.first);
    float v = static_cast<float>(uv.second);
    if (u >= pair.image.width) {
      u = std::nextafterf(static_cast<float>(pair.image.width), 0.0f);
    }
    if (v >= pair.image.height) {
      v = std::nextafterf(static_cast<float>(pair.image.height), 0.0f);
    }
    uv = {u, v};
  }
  write_projection(stem + ".bdgp", safe);
  write_image(stem + ".bdgi", pair.image);
}

ScenePair read_scene_pair(const std::string& stem,
                          const std::string& domain_tag) {
  ScenePair pair;
  pair.cloud = read_cloud(stem + ".bdgc");
  pair.projection = read_projection(stem + ".bdgp");
  pair.image = read_image(stem + ".bdgi");
  pair.domain_tag = domain_tag;
  pair.validate_projection_bounds();
  return pair;
}

}  // namespace bevdg
