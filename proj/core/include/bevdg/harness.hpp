#pragma once

#include <string>
#include <vector>

#include "bevdg/dvm.hpp"
#include "bevdg/eval.hpp"
#include "bevdg/train.hpp"
#include "bevdg/world.hpp"

namespace bevdg {

// Everything needed to run one end-to-end experiment: the two source
// sensors, the unseen target sensor, scene counts and the model/optimizer
// settings. Defaults are desk scale.
struct ExperimentConfig {
  uint64_t seed = 7;
  WorldSpec world;
  LidarConfig source1;  // sparse source
  LidarConfig source2;  // dense source
  LidarConfig target;   // unseen density
  CameraModel camera = CameraModel::forward_default();
  GridSpec grid;
  ModelConfig model;
  Hyperparams hyper;
  int train_scenes = 12;  // per source
  int eval_scenes = 6;    // target scenes
  double perturb_radius_px = 20.0;

  static ExperimentConfig desk_default();
};

// Scene pairs for one domain role; scene i uses its own generated world.
std::vector<ScenePair> synth_scenes(const ExperimentConfig& cfg,
                                    const LidarConfig& lidar,
                                    const std::string& role, int count,
                                    uint64_t seed);

// Prepares training data for the two sources including density-transferred
// counterparts, plus prepared target scenes for validation.
TrainData build_train_data(const ExperimentConfig& cfg,
                           const ModelConfig& model, uint64_t seed);

// Trains one model variant on the experiment's sources.
ModelParams train_variant(const ExperimentConfig& cfg, const ModelConfig& model,
                          uint64_t seed);

// --- Misalignment sweep (robustness-to-misalignment harness) ---

struct SweepRow {
  std::string method;
  double fraction = 0.0;
  uint64_t seed = 0;
  EvalScores scores;
};

struct SweepResult {
  std::vector<double> fractions;  // ascending
  std::vector<SweepRow> rows;
};

struct NamedModel {
  std::string method;
  const ModelParams* params = nullptr;
};

// Evaluates each trained model on the target scenes at every misalignment
// fraction, one row per (method, fraction, seed). Rows are ordered by
// (method, fraction, seed); cell evaluations are independent.
SweepResult misalignment_sweep(const std::vector<NamedModel>& models,
                               const std::vector<ScenePair>& target_scenes,
                               const GridSpec& grid,
                               std::vector<double> fractions,
                               const std::vector<uint64_t>& seeds,
                               double radius_px);

// Trains the area-to-area pipeline and the point-to-point comparator on
// identical data for one experiment seed.
struct SweepModels {
  ModelParams area;
  ModelParams point;
};
SweepModels train_sweep_models(const ExperimentConfig& cfg, uint64_t seed);

// --- Domain-generalization ablation (two sources -> unseen target) ---

struct DgRow {
  std::string variant;
  bool baf = false;
  bool bdcl = false;
  uint64_t seed = 0;
  EvalScores scores;
};

// Trains baseline / +BAF / +BDCL / full on the two source densities and
// evaluates every variant on the unseen target density, once per seed.
std::vector<DgRow> dg_experiment(const ExperimentConfig& cfg,
                                 const std::vector<uint64_t>& seeds);

}  // namespace bevdg
