#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevdg/bev.hpp"
#include "bevdg/scene.hpp"

namespace bevdg {

// Cell-population bins. Three half-open intervals [start, mid_start),
// [mid_start, high_start), [high_start, inf) that must partition [1, inf):
// start == 1 and strictly increasing edges.
struct HistogramBins {
  uint32_t start = 1;
  uint32_t mid_start = 10;
  uint32_t high_start = 50;

  void validate() const;
  // Bin of a non-empty cell count: 0 = low, 1 = mid, 2 = high.
  int bin_of(uint32_t count) const;
};

// Counts of non-empty BEV cells per population bin.
struct AreaHistogram {
  uint64_t n_low = 0;
  uint64_t n_mid = 0;
  uint64_t n_high = 0;
  uint64_t n_all = 0;  // non-empty cells only

  bool operator==(const AreaHistogram&) const = default;
};

AreaHistogram area_histogram(const BevGrid& grid,
                             const HistogramBins& bins = {});

// Density-maintained global vector, L2-normalized for contrastive use
// (the all-zero vector of an empty grid stays zero).
struct BevVector {
  std::vector<double> values;
  std::string domain_tag;
};

// Intermediates of dvm_vector, kept for gradient routing.
struct DvmTrace {
  HistogramBins bins;
  AreaHistogram hist;
  double weights[3] = {0, 0, 0};       // N_bin / N_all
  std::vector<int32_t> argmax;          // 3*channels, cell index or -1
  std::vector<double> unnormalized;     // channels
  double norm = 0.0;
  std::vector<double> values;           // normalized
};

// The density-maintained vector: a population-weighted sum of per-bin
// coordinate-wise maxes over non-empty cells, then L2-normalized. An empty
// bin contributes the zero vector; an entirely empty grid yields zero.
// `hist` must equal the histogram recomputed from the grid.
BevVector dvm_vector(const BevGrid& grid, const AreaHistogram& hist,
                     const HistogramBins& bins = {},
                     const std::string& domain_tag = {});
DvmTrace dvm_vector_trace(const BevGrid& grid, const AreaHistogram& hist,
                          const HistogramBins& bins = {});

// Resamples a cloud so its beam structure matches the target sensor while
// labels and geometry semantics are preserved. Nested-grid decimation when
// the target is sparser; midpoint interpolation of adjacent beams at
// shared azimuths when the target is denser (beam counts must differ by a
// power-of-two factor); identity when equal.
std::vector<Point> density_transfer(const std::vector<Point>& cloud,
                                    const LidarConfig& source,
                                    const LidarConfig& target, uint64_t seed);

// Pair-level density transfer: the image is untouched, projections of kept
// points are carried over and an interpolated point projects to the pixel
// midpoint of its parents.
ScenePair density_transfer_pair(const ScenePair& pair,
                                const LidarConfig& source,
                                const LidarConfig& target, uint64_t seed);

// Occupancy-only grid (zero feature channels) for histogram reports.
BevGrid count_grid(const std::vector<Point>& cloud, const GridSpec& spec);

}  // namespace bevdg
