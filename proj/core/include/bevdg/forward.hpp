#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevdg/dvm.hpp"
#include "bevdg/model.hpp"
#include "bevdg/scene.hpp"

namespace bevdg {

// A scene pair with all parameter-independent features precomputed: raw
// network inputs for both modalities, pillar assignments and labels.
// Preparing once and reusing across training iterations keeps the k-NN
// and image sampling cost out of the hot loop.
struct PreparedScene {
  int n = 0;
  std::string domain_tag;
  GridSpec grid;
  std::vector<double> input3d;   // n * 8: x,y,z,intensity + kNN mean
  std::vector<double> input2d;   // n * 2F: pixel channels + 3x3 mean
  std::vector<double> xy;        // n * 2, BEV-space point locations
  std::vector<int32_t> cell;     // n, flat cell id or -1
  std::vector<uint8_t> labels;   // n
};

// Requires the pair's projection map to cover every point (the front-camera
// restriction guarantees this for generated pairs).
PreparedScene prepare_scene(const ScenePair& pair, const GridSpec& grid,
                            const ModelConfig& config);

// Every intermediate of one scene forward pass, kept for the reverse pass.
struct ForwardTrace {
  const PreparedScene* scene = nullptr;

  // Backbones: affine -> ReLU -> affine -> ReLU.
  std::vector<double> z1_2d, a1_2d, z2_2d, f2d;
  std::vector<double> z1_3d, a1_3d, z2_3d, f3d;

  // BEV stage (present when the config has a fused BEV map).
  BevGrid bev2d, bev3d;
  std::vector<int32_t> arg2d, arg3d;   // scatter-max argmax per cell/channel
  std::vector<double> fused_z;         // pre-ReLU fc1 outputs per cell
  std::vector<uint8_t> fused_eval;     // 1 when the cell was evaluated
  BevGrid fused;

  // Point-level fusion (fc2 path).
  std::vector<double> z3_2d, fbar2d;
  std::vector<double> z3_3d, fbar3d;

  // Heads.
  std::vector<double> logits2d, logits3d;  // n * classes
  std::vector<double> logp2d, logp3d;      // log-softmax rows

  DvmTrace dvm;  // density-maintained vector (bdcl path)
};

ForwardTrace forward_scene(const PreparedScene& scene,
                           const ModelParams& params);

// Reverse pass for one scene. Upstream gradients may be null when a branch
// does not participate in the loss. Accumulates into `grads` (+=).
void backward_scene(const ForwardTrace& trace, const ModelParams& params,
                    const double* d_logits2d, const double* d_logits3d,
                    const double* d_vector, ModelParams* grads);

// Whole-pipeline forward for library users: per-point class probabilities
// for both modalities, the fused BEV map and the density-maintained vector
// (empty when the configuration has no fused BEV map).
struct ForwardResult {
  std::vector<double> probs2d;  // n * classes, rows sum to 1
  std::vector<double> probs3d;
  BevGrid bev;
  BevVector vector;
};

ForwardResult forward(const ScenePair& pair, const ModelParams& params,
                      const GridSpec& grid);

// Row-wise softmax probabilities from a trace's log-softmax.
std::vector<double> probs_from_logp(const std::vector<double>& logp);

}  // namespace bevdg
