#include "bevdg/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace bevdg {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) +
                            ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw InvalidArgument("config line " + std::to_string(lineno) +
                            ": empty key");
    }
    if (!kv.values_.emplace(key, value).second) {
      throw InvalidArgument("config: duplicate key " + key);
    }
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string KeyValueFile::get_string(const std::string& key,
                                     const std::string& fallback) const {
  consumed_[key] = true;
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  consumed_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("config: bad number for " + key + ": " + it->second);
  }
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw InvalidArgument("config: expected integer for " + key);
  }
  return i;
}

uint64_t KeyValueFile::get_u64(const std::string& key, uint64_t fallback) const {
  consumed_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(
      it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size()) {
    throw InvalidArgument("config: bad unsigned integer for " + key);
  }
  return v;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  consumed_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw InvalidArgument("config: bad bool for " + key + ": " + it->second);
}

std::vector<double> KeyValueFile::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  consumed_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::istringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidArgument("config: bad list entry for " + key + ": " + item);
    }
  }
  return out;
}

void KeyValueFile::check_all_consumed() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) {
    throw InvalidArgument("config: unknown keys: " + unknown);
  }
}

namespace {

LidarConfig read_lidar(const KeyValueFile& kv, const std::string& prefix,
                       const LidarConfig& defaults) {
  LidarConfig cfg = defaults;
  cfg.beam_count = kv.get_int(prefix + ".beams", cfg.beam_count);
  cfg.vertical_fov_min_deg =
      kv.get_double(prefix + ".fov_min", cfg.vertical_fov_min_deg);
  cfg.vertical_fov_max_deg =
      kv.get_double(prefix + ".fov_max", cfg.vertical_fov_max_deg);
  cfg.azimuth_step_deg =
      kv.get_double(prefix + ".azimuth_step", cfg.azimuth_step_deg);
  cfg.max_range = kv.get_double(prefix + ".max_range", cfg.max_range);
  cfg.sensor_height = kv.get_double(prefix + ".height", cfg.sensor_height);
  cfg.dropout_rate = kv.get_double(prefix + ".dropout", cfg.dropout_rate);
  cfg.domain_tag = kv.get_string(prefix + ".tag", cfg.domain_tag);
  cfg.validate();
  return cfg;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  return from_kv(KeyValueFile::parse_file(path));
}

RunConfig RunConfig::from_kv(const KeyValueFile& kv) {
  RunConfig rc;
  ExperimentConfig& e = rc.experiment;
  e = ExperimentConfig::desk_default();

  e.seed = kv.get_u64("seed", e.seed);
  rc.out_dir = kv.get_string("out", rc.out_dir);

  WorldSpec& w = e.world;
  w.ground_x_min = kv.get_double("world.ground_x_min", w.ground_x_min);
  w.ground_x_max = kv.get_double("world.ground_x_max", w.ground_x_max);
  w.ground_y_min = kv.get_double("world.ground_y_min", w.ground_y_min);
  w.ground_y_max = kv.get_double("world.ground_y_max", w.ground_y_max);
  w.place_x_min = kv.get_double("world.place_x_min", w.place_x_min);
  w.place_x_max = kv.get_double("world.place_x_max", w.place_x_max);
  w.place_y_min = kv.get_double("world.place_y_min", w.place_y_min);
  w.place_y_max = kv.get_double("world.place_y_max", w.place_y_max);
  w.num_cars = kv.get_int("world.cars", w.num_cars);
  w.num_trucks = kv.get_int("world.trucks", w.num_trucks);
  w.num_bikes = kv.get_int("world.bikes", w.num_bikes);
  w.num_persons = kv.get_int("world.persons", w.num_persons);
  w.albedo_jitter = kv.get_double("world.albedo_jitter", w.albedo_jitter);
  w.image_noise = kv.get_double("world.image_noise", w.image_noise);

  e.source1 = read_lidar(kv, "lidar.source1", e.source1);
  e.source2 = read_lidar(kv, "lidar.source2", e.source2);
  e.target = read_lidar(kv, "lidar.target", e.target);

  CameraModel& cam = e.camera;
  cam.fx = kv.get_double("camera.fx", cam.fx);
  cam.fy = kv.get_double("camera.fy", cam.fy);
  cam.cx = kv.get_double("camera.cx", cam.cx);
  cam.cy = kv.get_double("camera.cy", cam.cy);
  cam.width = kv.get_int("camera.width", cam.width);
  cam.height = kv.get_int("camera.height", cam.height);
  const double cam_h = kv.get_double("camera.height_m", 1.6);
  e.camera = CameraModel::forward_default(cam_h);
  e.camera.fx = cam.fx;
  e.camera.fy = cam.fy;
  e.camera.cx = cam.cx;
  e.camera.cy = cam.cy;
  e.camera.width = cam.width;
  e.camera.height = cam.height;
  e.camera.validate();

  GridSpec& g = e.grid;
  g.cell_size = kv.get_double("grid.cell_size", g.cell_size);
  g.cells_x = kv.get_int("grid.w", g.cells_x);
  g.cells_y = kv.get_int("grid.l", g.cells_y);
  g.origin_x = kv.get_double("grid.origin_x", g.origin_x);
  g.origin_y = kv.get_double(
      "grid.origin_y", -0.5 * g.cells_y * g.cell_size);
  g.validate();

  ModelConfig& m = e.model;
  m.fusion = fusion_mode_from_name(
      kv.get_string("model.fusion", fusion_mode_name(m.fusion)));
  m.bdcl = kv.get_bool("model.bdcl", m.bdcl);
  m.knn = kv.get_int("model.knn", m.knn);
  m.hidden_2d = kv.get_int("model.hidden2d", m.hidden_2d);
  m.hidden_3d = kv.get_int("model.hidden3d", m.hidden_3d);
  m.c_2d = kv.get_int("model.c2d", m.c_2d);
  m.c_3d = kv.get_int("model.c3d", m.c_3d);
  m.fc1_out = kv.get_int("model.fc1_out", m.fc1_out);
  m.fc2_out = kv.get_int("model.fc2_out", m.fc2_out);
  m.validate();

  Hyperparams& h = e.hyper;
  h.tau = kv.get_double("hyper.tau", h.tau);
  h.lambda_ct = kv.get_double("hyper.lambda_ct", h.lambda_ct);
  h.lr = kv.get_double("hyper.lr", h.lr);
  h.beta1 = kv.get_double("hyper.beta1", h.beta1);
  h.beta2 = kv.get_double("hyper.beta2", h.beta2);
  h.batch_size = kv.get_int("hyper.batch_size", h.batch_size);
  h.iterations = kv.get_int("hyper.iterations", h.iterations);
  h.lr_drop1 = kv.get_double("hyper.lr_drop1", h.lr_drop1);
  h.lr_drop2 = kv.get_double("hyper.lr_drop2", h.lr_drop2);
  h.val_interval = kv.get_int("hyper.val_interval", h.val_interval);
  h.validate();

  e.train_scenes = kv.get_int("data.train_scenes", e.train_scenes);
  e.eval_scenes = kv.get_int("data.eval_scenes", e.eval_scenes);
  e.perturb_radius_px =
      kv.get_double("sweep.radius", e.perturb_radius_px);

  rc.synth_count = kv.get_int("data.synth_count", e.train_scenes);
  rc.sweep_fractions = kv.get_double_list("sweep.fractions", rc.sweep_fractions);
  rc.sweep_seeds = kv.get_int("sweep.seeds", rc.sweep_seeds);
  rc.dg_seeds = kv.get_int("dg.seeds", rc.dg_seeds);

  const std::vector<double> bins =
      kv.get_double_list("hist.bins", {1.0, 10.0, 50.0});
  if (bins.size() != 3) {
    throw InvalidArgument("config: hist.bins needs exactly 3 edges");
  }
  rc.hist_bins.start = static_cast<uint32_t>(bins[0]);
  rc.hist_bins.mid_start = static_cast<uint32_t>(bins[1]);
  rc.hist_bins.high_start = static_cast<uint32_t>(bins[2]);
  rc.hist_bins.validate();

  kv.check_all_consumed();
  return rc;
}

}  // namespace bevdg
