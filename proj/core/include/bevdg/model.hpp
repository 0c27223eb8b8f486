#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevdg/bev.hpp"

namespace bevdg {

// How per-point features of the two modalities are combined before the
// classifier heads.
//   kNone: heads read the backbone features directly (the baseline).
//   kPoint: per-point concatenation across modalities at the projected
//           pixel (the misalignment-sensitive comparator).
//   kArea: BEV area-to-area fusion followed by point-to-area fusion.
enum class FusionMode : uint8_t { kNone = 0, kPoint = 1, kArea = 2 };

const char* fusion_mode_name(FusionMode mode);
FusionMode fusion_mode_from_name(const std::string& name);

struct ModelConfig {
  FusionMode fusion = FusionMode::kArea;
  bool bdcl = true;  // contrastive branch over density-maintained vectors
  int image_channels = kImageChannels;
  int knn = 8;          // 3D neighborhood size
  int hidden_2d = 16;
  int hidden_3d = 16;
  int c_2d = 16;        // 2D backbone output channels
  int c_3d = 16;        // 3D backbone output channels
  int fc1_out = 32;     // fused BEV channels
  int fc2_out = 32;     // point-to-area fused channels
  int num_classes = kNumClasses;

  // Raw per-pixel channels plus their 3x3 neighborhood mean.
  int input_dim_2d() const { return 2 * image_channels; }
  // (x, y, z, intensity) plus their k-nearest-neighbor mean.
  int input_dim_3d() const { return 8; }
  // The fused BEV map exists for area fusion and whenever the contrastive
  // branch needs a vector.
  bool has_fused_bev() const { return fusion == FusionMode::kArea || bdcl; }
  bool has_fc2() const { return fusion != FusionMode::kNone; }
  int fc2_in_2d() const {
    return c_2d + (fusion == FusionMode::kArea ? fc1_out : c_3d);
  }
  int fc2_in_3d() const {
    return c_3d + (fusion == FusionMode::kArea ? fc1_out : c_2d);
  }
  int head_in_2d() const { return has_fc2() ? fc2_out : c_2d; }
  int head_in_3d() const { return has_fc2() ? fc2_out : c_3d; }

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// All trainable weights. Layers not used by the configuration stay empty.
struct ModelParams {
  ModelConfig config;
  LinearLayer net2d_l1, net2d_l2;
  LinearLayer net3d_l1, net3d_l2;
  LinearLayer fc1;
  LinearLayer fc2_2d, fc2_3d;
  LinearLayer head2d, head3d;

  // Seeded uniform init scaled by 1/sqrt(fan_in); per-layer sub-seeds keep
  // shared layers identical across configurations.
  static ModelParams init(const ModelConfig& config, uint64_t seed);
  static ModelParams zeros_like(const ModelConfig& config);

  struct NamedLayer {
    const char* name;
    LinearLayer* layer;
  };
  struct ConstNamedLayer {
    const char* name;
    const LinearLayer* layer;
  };
  // Active layers in the fixed serialization order.
  std::vector<NamedLayer> layers();
  std::vector<ConstNamedLayer> layers() const;

  size_t param_count() const;
  // Flat scalar access across all active layers (weights then bias per
  // layer); used by the optimizer and finite-difference checks.
  double& param(size_t flat_index);
  double param(size_t flat_index) const;

  void check_finite(const std::string& context) const;
};

struct Hyperparams {
  double tau = 0.01;        // contrastive temperature
  double lambda_ct = 0.01;  // contrastive weight
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 8;
  int iterations = 2000;
  // Learning-rate /10 drop points as fractions of total iterations.
  double lr_drop1 = 0.8;
  double lr_drop2 = 0.9;
  int val_interval = 100;

  void validate() const;
  double lr_at(int iteration) const;
};

// Checkpoint file ("BDGM"): header, config block, shape manifest, then the
// flat f64 parameter dump.
void write_checkpoint(const std::string& path, const ModelParams& params);
ModelParams read_checkpoint(const std::string& path);

}  // namespace bevdg
