#include "bevdg/bev.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bevdg/io_util.hpp"

namespace bevdg {

void GridSpec::validate() const {
  if (!(cell_size > 0.0)) throw InvalidArgument("grid: cell_size must be > 0");
  if (cells_x < 1 || cells_y < 1) {
    throw InvalidArgument("grid: need at least one cell per axis");
  }
}

std::optional<CellIndex> assign_pillar(double x, double y,
                                       const GridSpec& spec) {
  const int i = static_cast<int>(std::floor((x - spec.origin_x) / spec.cell_size));
  const int j = static_cast<int>(std::floor((y - spec.origin_y) / spec.cell_size));
  if (i < 0 || i >= spec.cells_x || j < 0 || j >= spec.cells_y) {
    return std::nullopt;
  }
  return CellIndex{i, j};
}

int assign_pillar_flat(double x, double y, const GridSpec& spec) {
  const auto cell = assign_pillar(x, y, spec);
  return cell ? cell->i * spec.cells_y + cell->j : -1;
}

BevGrid BevGrid::zeros(const GridSpec& spec, int channels) {
  spec.validate();
  BevGrid g;
  g.spec = spec;
  g.channels = channels;
  g.features.assign(static_cast<size_t>(spec.cell_count()) * channels, 0.0);
  g.counts.assign(static_cast<size_t>(spec.cell_count()), 0);
  return g;
}

LinearLayer LinearLayer::zeros(int in_dim, int out_dim) {
  LinearLayer l;
  l.in_dim = in_dim;
  l.out_dim = out_dim;
  l.weight.assign(static_cast<size_t>(in_dim) * out_dim, 0.0);
  l.bias.assign(static_cast<size_t>(out_dim), 0.0);
  return l;
}

void LinearLayer::validate() const {
  if (weight.size() != static_cast<size_t>(in_dim) * out_dim ||
      bias.size() != static_cast<size_t>(out_dim)) {
    throw InvalidArgument("linear layer: inconsistent shapes");
  }
  for (double w : weight) {
    if (!std::isfinite(w)) throw InvalidArgument("linear layer: non-finite weight");
  }
  for (double b : bias) {
    if (!std::isfinite(b)) throw InvalidArgument("linear layer: non-finite bias");
  }
}

void LinearLayer::apply(const double* x, double* y) const {
  for (int o = 0; o < out_dim; ++o) {
    const double* row = &weight[static_cast<size_t>(o) * in_dim];
    double acc = bias[o];
    for (int i = 0; i < in_dim; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

BevGrid scatter_max(const std::vector<double>& point_features, int channels,
                    const std::vector<double>& point_xy, const GridSpec& spec,
                    std::vector<int32_t>* argmax) {
  const size_t n = point_xy.size() / 2;
  if (point_features.size() != n * static_cast<size_t>(channels)) {
    throw InvalidArgument("scatter_max: feature/point length mismatch");
  }
  BevGrid grid = BevGrid::zeros(spec, channels);
  if (argmax) {
    argmax->assign(static_cast<size_t>(spec.cell_count()) * channels, -1);
  }
  for (size_t p = 0; p < n; ++p) {
    const int cell = assign_pillar_flat(point_xy[2 * p], point_xy[2 * p + 1], spec);
    if (cell < 0) continue;
    const double* f = &point_features[p * channels];
    double* g = grid.cell(cell);
    int32_t* am = argmax ? &(*argmax)[static_cast<size_t>(cell) * channels] : nullptr;
    if (grid.counts[cell] == 0) {
      // First point in the pillar defines the running max, so pooled
      // features can be negative.
      for (int c = 0; c < channels; ++c) {
        g[c] = f[c];
        if (am) am[c] = static_cast<int32_t>(p);
      }
    } else {
      // Strict > keeps the lowest point index on ties.
      for (int c = 0; c < channels; ++c) {
        if (f[c] > g[c]) {
          g[c] = f[c];
          if (am) am[c] = static_cast<int32_t>(p);
        }
      }
    }
    grid.counts[cell]++;
  }
  return grid;
}

namespace {

std::vector<double> cloud_xy(const std::vector<Point>& cloud) {
  std::vector<double> xy(cloud.size() * 2);
  for (size_t i = 0; i < cloud.size(); ++i) {
    xy[2 * i] = cloud[i].position.x;
    xy[2 * i + 1] = cloud[i].position.y;
  }
  return xy;
}

}  // namespace

BevGrid scatter_max_3d(const std::vector<double>& point_features, int channels,
                       const std::vector<Point>& cloud, const GridSpec& spec,
                       std::vector<int32_t>* argmax) {
  if (point_features.size() != cloud.size() * static_cast<size_t>(channels)) {
    throw InvalidArgument("scatter_max_3d: feature/cloud length mismatch");
  }
  return scatter_max(point_features, channels, cloud_xy(cloud), spec, argmax);
}

BevGrid scatter_max_2d(const std::vector<double>& pixel_features, int channels,
                       const ProjectionMap& projection,
                       const std::vector<Point>& cloud, const GridSpec& spec,
                       std::vector<int32_t>* argmax) {
  if (pixel_features.size() != projection.size() * static_cast<size_t>(channels)) {
    throw InvalidArgument("scatter_max_2d: feature/projection length mismatch");
  }
  // Pool pixel features into the pillar of the corresponding 3D point.
  std::vector<double> xy;
  xy.reserve(projection.size() * 2);
  for (const auto& [idx, uv] : projection) {
    if (idx >= cloud.size()) {
      throw InvalidArgument("scatter_max_2d: projection index out of range");
    }
    xy.push_back(cloud[idx].position.x);
    xy.push_back(cloud[idx].position.y);
  }
  return scatter_max(pixel_features, channels, xy, spec, argmax);
}

BevGrid fuse_bev(const BevGrid& bev2d, const BevGrid& bev3d,
                 const LinearLayer& fc1) {
  if (!(bev2d.spec == bev3d.spec)) {
    throw InvalidArgument("fuse_bev: grid specs differ");
  }
  if (fc1.in_dim != bev2d.channels + bev3d.channels) {
    throw InvalidArgument("fuse_bev: fc1 input dim mismatch");
  }
  BevGrid out = BevGrid::zeros(bev3d.spec, fc1.out_dim);
  out.counts = bev3d.counts;
  std::vector<double> cat(static_cast<size_t>(fc1.in_dim));
  std::vector<double> z(static_cast<size_t>(fc1.out_dim));
  const int cells = bev3d.spec.cell_count();
  for (int cell = 0; cell < cells; ++cell) {
    if (bev2d.counts[cell] == 0 && bev3d.counts[cell] == 0) continue;
    std::copy_n(bev2d.cell(cell), bev2d.channels, cat.data());
    std::copy_n(bev3d.cell(cell), bev3d.channels, cat.data() + bev2d.channels);
    fc1.apply(cat.data(), z.data());
    double* o = out.cell(cell);
    for (int c = 0; c < fc1.out_dim; ++c) o[c] = std::max(0.0, z[c]);
  }
  return out;
}

std::vector<double> fuse_point_area(const std::vector<double>& point_feature,
                                    const std::vector<double>& cell_feature,
                                    const LinearLayer& fc2) {
  if (static_cast<int>(point_feature.size() + cell_feature.size()) !=
      fc2.in_dim) {
    throw InvalidArgument("fuse_point_area: fc2 input dim mismatch");
  }
  std::vector<double> cat(point_feature);
  cat.insert(cat.end(), cell_feature.begin(), cell_feature.end());
  std::vector<double> out(static_cast<size_t>(fc2.out_dim));
  fc2.apply(cat.data(), out.data());
  for (double& v : out) v = std::max(0.0, v);
  return out;
}

void write_bev_grid(const std::string& path, const BevGrid& grid) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  io::write_magic(f, "BDGB");
  io::write_u16(f, 1);
  io::write_f64(f, grid.spec.origin_x);
  io::write_f64(f, grid.spec.origin_y);
  io::write_f64(f, grid.spec.cell_size);
  io::write_u32(f, static_cast<uint32_t>(grid.spec.cells_x));
  io::write_u32(f, static_cast<uint32_t>(grid.spec.cells_y));
  io::write_u32(f, static_cast<uint32_t>(grid.channels));
  for (double v : grid.features) io::write_f32(f, static_cast<float>(v));
  for (uint32_t c : grid.counts) io::write_u32(f, c);
  if (!f) throw IoError("write failed: " + path);
}

BevGrid read_bev_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  io::expect_magic(f, "BDGB", path);
  io::expect_version(f, 1, path);
  GridSpec spec;
  spec.origin_x = io::read_f64(f);
  spec.origin_y = io::read_f64(f);
  spec.cell_size = io::read_f64(f);
  spec.cells_x = static_cast<int>(io::read_u32(f));
  spec.cells_y = static_cast<int>(io::read_u32(f));
  const int channels = static_cast<int>(io::read_u32(f));
  BevGrid grid = BevGrid::zeros(spec, channels);
  for (double& v : grid.features) v = io::read_f32(f);
  for (uint32_t& c : grid.counts) c = io::read_u32(f);
  if (!f) throw IoError("truncated grid file: " + path);
  return grid;
}

}  // namespace bevdg
