#include "bevdg/dvm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace bevdg {

void HistogramBins::validate() const {
  if (start != 1) {
    throw InvalidArgument("histogram bins: first bin must start at 1");
  }
  if (!(start < mid_start && mid_start < high_start)) {
    throw InvalidArgument("histogram bins: edges must be strictly increasing");
  }
}

int HistogramBins::bin_of(uint32_t count) const {
  if (count < mid_start) return 0;
  if (count < high_start) return 1;
  return 2;
}

AreaHistogram area_histogram(const BevGrid& grid, const HistogramBins& bins) {
  bins.validate();
  AreaHistogram h;
  for (uint32_t c : grid.counts) {
    if (c == 0) continue;
    switch (bins.bin_of(c)) {
      case 0: h.n_low++; break;
      case 1: h.n_mid++; break;
      default: h.n_high++; break;
    }
    h.n_all++;
  }
  return h;
}

DvmTrace dvm_vector_trace(const BevGrid& grid, const AreaHistogram& hist,
                          const HistogramBins& bins) {
  if (!(area_histogram(grid, bins) == hist)) {
    throw InvalidArgument("dvm_vector: histogram does not match grid");
  }
  const int channels = grid.channels;
  DvmTrace t;
  t.bins = bins;
  t.hist = hist;
  t.argmax.assign(3 * static_cast<size_t>(channels), -1);
  t.unnormalized.assign(static_cast<size_t>(channels), 0.0);

  if (hist.n_all > 0) {
    // Weights are the rationals N_bin/N_all; the last non-empty bin takes
    // the complement of the earlier ones so the floating-point weights sum
    // to exactly 1.0 while empty bins keep weight exactly 0.
    const double n_all = static_cast<double>(hist.n_all);
    const uint64_t nbin[3] = {hist.n_low, hist.n_mid, hist.n_high};
    int last = 0;
    for (int b = 0; b < 3; ++b) {
      if (nbin[b] > 0) last = b;
    }
    double partial = 0.0;
    for (int b = 0; b < 3; ++b) {
      if (nbin[b] == 0) continue;
      t.weights[b] = b == last ? 1.0 - partial
                               : static_cast<double>(nbin[b]) / n_all;
      partial += t.weights[b];
    }

    // Coordinate-wise max per bin; scan order breaks ties toward the
    // lowest cell index.
    std::vector<double> bin_max(3 * static_cast<size_t>(channels), 0.0);
    const int cells = grid.spec.cell_count();
    for (int cell = 0; cell < cells; ++cell) {
      if (grid.counts[cell] == 0) continue;
      const int b = bins.bin_of(grid.counts[cell]);
      double* bm = &bin_max[static_cast<size_t>(b) * channels];
      int32_t* am = &t.argmax[static_cast<size_t>(b) * channels];
      const double* f = grid.cell(cell);
      for (int c = 0; c < channels; ++c) {
        if (am[c] < 0 || f[c] > bm[c]) {
          bm[c] = f[c];
          am[c] = cell;
        }
      }
    }
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < channels; ++c) {
        if (t.argmax[static_cast<size_t>(b) * channels + c] >= 0) {
          t.unnormalized[c] +=
              t.weights[b] * bin_max[static_cast<size_t>(b) * channels + c];
        }
      }
    }
  }

  double sq = 0.0;
  for (double v : t.unnormalized) sq += v * v;
  t.norm = std::sqrt(sq);
  t.values = t.unnormalized;
  if (t.norm > 0.0) {
    for (double& v : t.values) v /= t.norm;
  }
  return t;
}

BevVector dvm_vector(const BevGrid& grid, const AreaHistogram& hist,
                     const HistogramBins& bins, const std::string& domain_tag) {
  DvmTrace t = dvm_vector_trace(grid, hist, bins);
  return BevVector{std::move(t.values), domain_tag};
}

namespace {

// Recover the azimuth step index of a scan point; ray geometry makes
// atan2(y, x) an exact multiple of the azimuth step.
int azimuth_index(const Point& p, const LidarConfig& cfg, int azimuths) {
  double phi = std::atan2(p.position.y, p.position.x);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  const int idx = static_cast<int>(
      std::lround(phi / (cfg.azimuth_step_deg * kDegToRad)));
  return idx % azimuths;
}

struct Parents {
  int32_t a = -1, b = -1;  // b < 0: carried over unchanged
};

// One beam-doubling step: existing points move to even beams, midpoints
// of adjacent-beam returns at shared azimuths fill the odd beams.
void double_beams(std::vector<Point>* cloud, std::vector<Parents>* parents,
                  const LidarConfig& cfg, int current_beams) {
  const int azimuths = cfg.azimuth_count();
  // (beam, azimuth) -> index in cloud
  std::map<std::pair<int, int>, int> slot;
  for (size_t i = 0; i < cloud->size(); ++i) {
    const Point& p = (*cloud)[i];
    slot[{p.beam_id, azimuth_index(p, cfg, azimuths)}] = static_cast<int>(i);
  }

  std::vector<Point> next;
  std::vector<Parents> next_parents;
  next.reserve(cloud->size() * 2);
  for (size_t i = 0; i < cloud->size(); ++i) {
    Point p = (*cloud)[i];
    p.beam_id = static_cast<uint16_t>(p.beam_id * 2);
    next.push_back(p);
    next_parents.push_back((*parents)[i]);
  }
  for (int beam = 0; beam + 1 < current_beams; ++beam) {
    for (int az = 0; az < azimuths; ++az) {
      const auto lo = slot.find({beam, az});
      if (lo == slot.end()) continue;
      const auto hi = slot.find({beam + 1, az});
      if (hi == slot.end()) continue;
      const Point& a = (*cloud)[lo->second];
      const Point& b = (*cloud)[hi->second];
      Point mid;
      mid.position = (a.position + b.position) * 0.5;
      mid.intensity = 0.5 * (a.intensity + b.intensity);
      // Label from the parent nearer the sensor; ties go to the lower beam.
      mid.label =
          b.position.norm() < a.position.norm() ? b.label : a.label;
      mid.beam_id = static_cast<uint16_t>(2 * beam + 1);
      next.push_back(mid);
      next_parents.push_back(
          {static_cast<int32_t>(lo->second), static_cast<int32_t>(hi->second)});
    }
  }
  *cloud = std::move(next);
  *parents = std::move(next_parents);
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Shared implementation returning parent bookkeeping relative to the
// input cloud (valid for a single decimation or a single doubling chain).
std::vector<Point> transfer_impl(const std::vector<Point>& cloud,
                                 const LidarConfig& source,
                                 const LidarConfig& target,
                                 std::vector<Parents>* parents_out) {
  if (target.beam_count == source.beam_count) {
    if (parents_out) {
      parents_out->resize(cloud.size());
      for (size_t i = 0; i < cloud.size(); ++i) {
        (*parents_out)[i] = {static_cast<int32_t>(i), -1};
      }
    }
    return cloud;
  }

  if (target.beam_count < source.beam_count) {
    if (!target.nests_within(source)) {
      throw InvalidArgument("density_transfer: beam grids are not nested");
    }
    const int ratio = source.beam_count / target.beam_count;
    std::vector<Point> out;
    std::vector<Parents> parents;
    for (size_t i = 0; i < cloud.size(); ++i) {
      const Point& p = cloud[i];
      if (p.beam_id % ratio != 0) continue;
      Point q = p;
      q.beam_id = static_cast<uint16_t>(p.beam_id / ratio);
      out.push_back(q);
      parents.push_back({static_cast<int32_t>(i), -1});
    }
    if (parents_out) *parents_out = std::move(parents);
    return out;
  }

  if (!source.nests_within(target) ||
      !is_power_of_two(target.beam_count / source.beam_count)) {
    throw InvalidArgument(
        "density_transfer: interpolation needs a power-of-two nested target");
  }
  // Parent indices stay relative to the input cloud only across a single
  // doubling; multi-step callers must request one doubling at a time.
  if (parents_out && target.beam_count != 2 * source.beam_count) {
    throw InvalidArgument(
        "density_transfer: parent tracking needs single doubling steps");
  }
  std::vector<Point> out = cloud;
  std::vector<Parents> parents(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    parents[i] = {static_cast<int32_t>(i), -1};
  }
  int beams = source.beam_count;
  LidarConfig cfg = source;
  while (beams < target.beam_count) {
    cfg.beam_count = beams;
    double_beams(&out, &parents, cfg, beams);
    beams *= 2;
  }
  if (parents_out) *parents_out = std::move(parents);
  return out;
}

}  // namespace

std::vector<Point> density_transfer(const std::vector<Point>& cloud,
                                    const LidarConfig& source,
                                    const LidarConfig& target,
                                    uint64_t /*seed*/) {
  return transfer_impl(cloud, source, target, nullptr);
}

ScenePair density_transfer_pair(const ScenePair& pair,
                                const LidarConfig& source,
                                const LidarConfig& target, uint64_t seed) {
  ScenePair out;
  out.image = pair.image;
  out.domain_tag = target.domain_tag;

  if (target.beam_count <= source.beam_count) {
    std::vector<Parents> parents;
    out.cloud = transfer_impl(pair.cloud, source, target, &parents);
    for (size_t i = 0; i < parents.size(); ++i) {
      const auto it = pair.projection.find(parents[i].a);
      if (it != pair.projection.end()) {
        out.projection.emplace(static_cast<uint32_t>(i), it->second);
      }
    }
    return out;
  }

  // Upsample one doubling at a time so pixel midpoints compose.
  ScenePair cur = pair;
  LidarConfig cfg = source;
  while (cfg.beam_count < target.beam_count) {
    LidarConfig next_cfg = cfg;
    next_cfg.beam_count = cfg.beam_count * 2;
    std::vector<Parents> parents;
    std::vector<Point> next_cloud =
        transfer_impl(cur.cloud, cfg, next_cfg, &parents);
    ProjectionMap next_proj;
    for (size_t i = 0; i < parents.size(); ++i) {
      const Parents& pr = parents[i];
      if (pr.b < 0) {
        const auto it = cur.projection.find(pr.a);
        if (it != cur.projection.end()) {
          next_proj.emplace(static_cast<uint32_t>(i), it->second);
        }
      } else {
        const auto ia = cur.projection.find(pr.a);
        const auto ib = cur.projection.find(pr.b);
        if (ia != cur.projection.end() && ib != cur.projection.end()) {
          next_proj.emplace(
              static_cast<uint32_t>(i),
              std::make_pair(0.5 * (ia->second.first + ib->second.first),
                             0.5 * (ia->second.second + ib->second.second)));
        }
      }
    }
    cur.cloud = std::move(next_cloud);
    cur.projection = std::move(next_proj);
    cfg = next_cfg;
  }
  out.cloud = std::move(cur.cloud);
  out.projection = std::move(cur.projection);
  (void)seed;
  return out;
}

BevGrid count_grid(const std::vector<Point>& cloud, const GridSpec& spec) {
  BevGrid grid = BevGrid::zeros(spec, 0);
  for (const Point& p : cloud) {
    const int cell = assign_pillar_flat(p.position.x, p.position.y, spec);
    if (cell >= 0) grid.counts[cell]++;
  }
  return grid;
}

}  // namespace bevdg
