#pragma once

#include <string>
#include <vector>

#include "bevdg/scene.hpp"

namespace bevdg {

// Little-endian binary scene formats.
//
// Point cloud ("BDGC"): magic, version u16, N u32, F_img u16, then N
// records of (x, y, z: f32, intensity: f32, beam_id: u16, label: u8).
//
// Projection map ("BDGP"): magic, version u16, entry count u32, then
// entries of (point_index u32, u f32, v f32); unprojected points are
// simply absent.
//
// Image ("BDGI"): magic, version u16, H u16, W u16, F u16, then H*W*F f32
// channel values row-major, then H*W u8 labels.

void write_cloud(const std::string& path, const std::vector<Point>& cloud,
                 uint16_t image_channels);
std::vector<Point> read_cloud(const std::string& path,
                              uint16_t* image_channels = nullptr);

void write_projection(const std::string& path, const ProjectionMap& map);
ProjectionMap read_projection(const std::string& path);

void write_image(const std::string& path, const ImageGrid& image);
ImageGrid read_image(const std::string& path);

// Writes <stem>.bdgc / .bdgp / .bdgi next to each other.
void write_scene_pair(const std::string& stem, const ScenePair& pair);
ScenePair read_scene_pair(const std::string& stem,
                          const std::string& domain_tag);

}  // namespace bevdg
