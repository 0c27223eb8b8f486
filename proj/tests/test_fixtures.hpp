#pragma once

// Shared builders for small deterministic scenes used across test files.

#include "bevdg/forward.hpp"
#include "bevdg/harness.hpp"

namespace bevdg::testing {

inline WorldSpec tiny_world_spec() {
  WorldSpec spec;
  spec.place_x_min = 4.0;
  spec.place_x_max = 20.0;
  spec.place_y_min = -8.0;
  spec.place_y_max = 8.0;
  spec.num_cars = 2;
  spec.num_trucks = 1;
  spec.num_bikes = 1;
  spec.num_persons = 2;
  return spec;
}

inline LidarConfig tiny_lidar(int beams) {
  LidarConfig cfg;
  cfg.beam_count = beams;
  cfg.azimuth_step_deg = 6.0;  // coarse grid keeps clouds small
  cfg.max_range = 40.0;
  cfg.domain_tag = "beams" + std::to_string(beams);
  return cfg;
}

inline CameraModel tiny_camera() {
  CameraModel cam = CameraModel::forward_default(1.6);
  cam.width = 96;
  cam.height = 72;
  cam.fx = cam.fy = 80.0;
  cam.cx = 48.0;
  cam.cy = 36.0;
  return cam;
}

inline GridSpec tiny_grid() {
  // 8x8 cells of 2 m cover the tiny world footprint.
  return GridSpec{0.0, -8.0, 2.0, 8, 8};
}

inline ScenePair tiny_pair(uint64_t seed, int beams = 16) {
  const World world = generate_world(seed, tiny_world_spec());
  return make_scene_pair(world, tiny_lidar(beams), tiny_camera(), seed);
}

// Experiment config small enough for harness tests.
inline ExperimentConfig tiny_experiment() {
  ExperimentConfig cfg = ExperimentConfig::desk_default();
  cfg.world = tiny_world_spec();
  cfg.source1 = tiny_lidar(16);
  cfg.source2 = tiny_lidar(64);
  cfg.target = tiny_lidar(32);
  cfg.camera = tiny_camera();
  cfg.grid = tiny_grid();
  cfg.model.hidden_2d = cfg.model.hidden_3d = 8;
  cfg.model.c_2d = cfg.model.c_3d = 8;
  cfg.model.fc1_out = 12;
  cfg.model.fc2_out = 12;
  cfg.hyper.batch_size = 2;
  cfg.hyper.iterations = 30;
  cfg.hyper.val_interval = 15;
  cfg.train_scenes = 3;
  cfg.eval_scenes = 2;
  return cfg;
}

}  // namespace bevdg::testing
