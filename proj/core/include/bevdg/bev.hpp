#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bevdg/camera.hpp"
#include "bevdg/lidar.hpp"

namespace bevdg {

// Bird's-eye-view pillar grid over the sensor frame. Cell (i, j) covers
// [x0 + i*w, x0 + (i+1)*w) x [y0 + j*w, y0 + (j+1)*w); a point exactly on
// a boundary belongs to the higher-index cell (floor convention).
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = -16.0;
  double cell_size = 0.5;
  int cells_x = 64;  // W, along x (forward)
  int cells_y = 64;  // L, along y

  void validate() const;
  int cell_count() const { return cells_x * cells_y; }
  bool operator==(const GridSpec&) const = default;
};

struct CellIndex {
  int i = 0, j = 0;
  bool operator==(const CellIndex&) const = default;
};

// Pillar assignment of a 2D location. Out-of-extent is a value, not an
// error.
std::optional<CellIndex> assign_pillar(double x, double y,
                                       const GridSpec& spec);

// Flat cell id i*L + j, or -1 when out of extent.
int assign_pillar_flat(double x, double y, const GridSpec& spec);

// Per-cell feature vectors plus per-cell point counts. Empty cells hold
// the all-zero feature vector.
struct BevGrid {
  GridSpec spec;
  int channels = 0;
  std::vector<double> features;  // cell_count * channels, cell-major
  std::vector<uint32_t> counts;  // cell_count

  static BevGrid zeros(const GridSpec& spec, int channels);
  const double* cell(int flat) const { return &features[static_cast<size_t>(flat) * channels]; }
  double* cell(int flat) { return &features[static_cast<size_t>(flat) * channels]; }
};

// Dense affine map y = W x + b with a row-major (out x in) weight matrix.
struct LinearLayer {
  int in_dim = 0, out_dim = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  static LinearLayer zeros(int in_dim, int out_dim);
  void apply(const double* x, double* y) const;
  void validate() const;
};

// Scatter-max of per-point features into pillars: the feature of a cell is
// the coordinate-wise max over its points, its count the number of points
// assigned to it. `point_xy` supplies one (x, y) pair per point.
// `argmax`, when given, receives cell_count*channels entries holding the
// index of the point that produced each pooled coordinate (-1 for empty),
// ties broken toward the lowest point index.
BevGrid scatter_max(const std::vector<double>& point_features, int channels,
                    const std::vector<double>& point_xy, const GridSpec& spec,
                    std::vector<int32_t>* argmax = nullptr);

// Scatter-max of per-point 3D features; cell assignment from point x/y.
BevGrid scatter_max_3d(const std::vector<double>& point_features, int channels,
                       const std::vector<Point>& cloud, const GridSpec& spec,
                       std::vector<int32_t>* argmax = nullptr);

// Scatter-max of pixel features sampled at the projected pixel of each
// point. Cell assignment always uses the 3D point coordinates, never the
// pixel: this is what makes area matching tolerant to projection
// misalignment. `pixel_features` is aligned index-for-index with the
// projected points listed in `projection`.
BevGrid scatter_max_2d(const std::vector<double>& pixel_features, int channels,
                       const ProjectionMap& projection,
                       const std::vector<Point>& cloud, const GridSpec& spec,
                       std::vector<int32_t>* argmax = nullptr);

// Area-to-area fusion: per cell, concatenate the 2D and 3D features and
// apply fc1 followed by ReLU. Cells empty in both inputs stay zero; output
// counts come from the 3D grid.
BevGrid fuse_bev(const BevGrid& bev2d, const BevGrid& bev3d,
                 const LinearLayer& fc1);

// Point-to-area fusion: concatenate a point's own feature with the fused
// feature of its cell (the zero vector when the point is out of extent)
// and apply fc2 followed by ReLU.
std::vector<double> fuse_point_area(const std::vector<double>& point_feature,
                                    const std::vector<double>& cell_feature,
                                    const LinearLayer& fc2);

// Debug serialization ("BDGB"): header, spec fields, then row-major f32
// features and u32 counts.
void write_bev_grid(const std::string& path, const BevGrid& grid);
BevGrid read_bev_grid(const std::string& path);

}  // namespace bevdg
