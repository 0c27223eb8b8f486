// bevdg: synthetic LiDAR/camera domain-generalization experiments.
//
// Subcommands: synth, train, eval, sweep, dg, hist. Every command is a
// deterministic function of (config file, input files); re-running
// overwrites outputs with bit-identical bytes.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "bevdg/csv.hpp"
#include "bevdg/harness.hpp"
#include "bevdg/run_config.hpp"
#include "bevdg/scene_io.hpp"
#include "bevdg/svg.hpp"

namespace fs = std::filesystem;
using namespace bevdg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<double> cell_size;
  std::optional<int> grid_w;
  std::optional<int> grid_l;
};

RunConfig load_config(const GlobalOptions& opts) {
  RunConfig rc = RunConfig::from_file(opts.config_path);
  if (!opts.out_dir.empty()) rc.out_dir = opts.out_dir;
  if (opts.seed) rc.experiment.seed = *opts.seed;
  if (opts.cell_size) rc.experiment.grid.cell_size = *opts.cell_size;
  if (opts.grid_w) rc.experiment.grid.cells_x = *opts.grid_w;
  if (opts.grid_l) rc.experiment.grid.cells_y = *opts.grid_l;
  rc.experiment.grid.validate();
  return rc;
}

uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path.string());
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[8192];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!f) break;
  }
  return h;
}

struct RoleSpec {
  const char* role;
  const LidarConfig* lidar;
};

std::vector<RoleSpec> roles(const ExperimentConfig& e) {
  return {{"source1", &e.source1}, {"source2", &e.source2}, {"target", &e.target}};
}

int cmd_synth(const GlobalOptions& opts, int count_override) {
  const RunConfig rc = load_config(opts);
  const ExperimentConfig& e = rc.experiment;
  const int count = count_override >= 0 ? count_override : rc.synth_count;

  const fs::path out(rc.out_dir);
  fs::create_directories(out / "scenes");
  std::ostringstream manifest;
  manifest << "# role index tag seed stem hash\n";
  for (const RoleSpec& role : roles(e)) {
    fs::create_directories(out / "scenes" / role.role);
    for (int i = 0; i < count; ++i) {
      const uint64_t scene_seed =
          derive_seed(e.seed, std::string("scene/") + role.role,
                      static_cast<uint64_t>(i));
      const World world = generate_world(scene_seed, e.world);
      const ScenePair pair =
          make_scene_pair(world, *role.lidar, e.camera, scene_seed);
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%04d", i);
      const fs::path stem = fs::path("scenes") / role.role / name;
      write_scene_pair((out / stem).string(), pair);
      uint64_t h = 0xcbf29ce484222325ULL;
      for (const char* ext : {".bdgc", ".bdgp", ".bdgi"}) {
        const uint64_t fh = fnv1a_file(out / (stem.string() + ext));
        h = (h ^ fh) * 0x100000001b3ULL;
      }
      char hash[24];
      std::snprintf(hash, sizeof(hash), "%016llx",
                    static_cast<unsigned long long>(h));
      manifest << role.role << ' ' << i << ' ' << role.lidar->domain_tag << ' '
               << scene_seed << ' ' << stem.generic_string() << ' ' << hash
               << '\n';
    }
  }
  std::ofstream mf(out / "scenes" / "manifest.txt");
  if (!mf) throw IoError("cannot write manifest");
  mf << manifest.str();
  std::cout << "synth: wrote " << count << " scene(s) per role to "
            << (out / "scenes").string() << "\n";
  return kExitOk;
}

std::vector<ScenePair> load_role_scenes(const RunConfig& rc,
                                        const std::string& role) {
  const fs::path manifest_path =
      fs::path(rc.out_dir) / "scenes" / "manifest.txt";
  std::ifstream mf(manifest_path);
  if (!mf) {
    throw IoError("missing scene manifest (run `synth` first): " +
                  manifest_path.string());
  }
  std::vector<ScenePair> out;
  std::string line;
  while (std::getline(mf, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string r, tag, stem, hash;
    int index = 0;
    uint64_t seed = 0;
    if (!(ss >> r >> index >> tag >> seed >> stem >> hash)) {
      throw IoError("malformed manifest line: " + line);
    }
    if (r != role) continue;
    out.push_back(
        read_scene_pair((fs::path(rc.out_dir) / stem).string(), tag));
  }
  if (out.empty()) {
    throw IoError("no scenes for role " + role + " in manifest");
  }
  return out;
}

TrainData prepare_train_data(const RunConfig& rc) {
  const ExperimentConfig& e = rc.experiment;
  const std::vector<ScenePair> s1 = load_role_scenes(rc, "source1");
  const std::vector<ScenePair> s2 = load_role_scenes(rc, "source2");
  const std::vector<ScenePair> target = load_role_scenes(rc, "target");

  TrainData data;
  for (size_t i = 0; i < s1.size(); ++i) {
    data.s1.push_back(prepare_scene(s1[i], e.grid, e.model));
    if (e.model.bdcl) {
      data.s1_dt.push_back(prepare_scene(
          density_transfer_pair(s1[i], e.source1, e.source2,
                                derive_seed(e.seed, "dt/s1", i)),
          e.grid, e.model));
    }
  }
  for (size_t i = 0; i < s2.size(); ++i) {
    data.s2.push_back(prepare_scene(s2[i], e.grid, e.model));
    if (e.model.bdcl) {
      data.s2_dt.push_back(prepare_scene(
          density_transfer_pair(s2[i], e.source2, e.source1,
                                derive_seed(e.seed, "dt/s2", i)),
          e.grid, e.model));
    }
  }
  for (const ScenePair& pair : target) {
    data.val_target.push_back(prepare_scene(pair, e.grid, e.model));
  }
  return data;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<TrainLogRow>& log) {
  csv::Writer w(path);
  w.row({"iteration", "seg_s1", "seg_s2", "ct_s1", "ct_s2", "total",
         "val_miou_2d", "val_miou_3d", "val_miou_avg"});
  for (const TrainLogRow& row : log) {
    std::vector<std::string> fields{
        csv::num(row.iteration),    csv::num(row.loss.seg_s1),
        csv::num(row.loss.seg_s2),  csv::num(row.loss.ct_s1),
        csv::num(row.loss.ct_s2),   csv::num(row.loss.total)};
    if (row.val) {
      fields.push_back(csv::num(row.val->miou_2d));
      fields.push_back(csv::num(row.val->miou_3d));
      fields.push_back(csv::num(row.val->miou_avg));
    } else {
      fields.insert(fields.end(), {"", "", ""});
    }
    w.row(fields);
  }
}

int cmd_train(const GlobalOptions& opts) {
  const RunConfig rc = load_config(opts);
  const ExperimentConfig& e = rc.experiment;
  const TrainData data = prepare_train_data(rc);
  const TrainResult result =
      train(data, e.model, e.hyper, derive_seed(e.seed, "train"));
  const fs::path out(rc.out_dir);
  fs::create_directories(out);
  write_checkpoint((out / "checkpoint.bdgm").string(), result.params);
  write_metrics_csv((out / "metrics.csv").string(), result.log);
  std::cout << "train: " << e.hyper.iterations << " iteration(s), checkpoint "
            << (out / "checkpoint.bdgm").string() << "\n";
  return kExitOk;
}

int cmd_eval(const GlobalOptions& opts, const std::string& checkpoint) {
  const RunConfig rc = load_config(opts);
  const ExperimentConfig& e = rc.experiment;
  const fs::path out(rc.out_dir);
  const std::string ckpt =
      checkpoint.empty() ? (out / "checkpoint.bdgm").string() : checkpoint;
  const ModelParams params = read_checkpoint(ckpt);
  const std::vector<ScenePair> target = load_role_scenes(rc, "target");
  const EvalScores scores = evaluate_pairs(params, target, e.grid, 0.0, 0.0,
                                           derive_seed(e.seed, "eval"));
  fs::create_directories(out);
  csv::Writer w((out / "eval.csv").string());
  w.row({"miou_2d", "miou_3d", "miou_avg"});
  w.row({csv::num(scores.miou_2d), csv::num(scores.miou_3d),
         csv::num(scores.miou_avg)});
  std::cout << "eval: miou_2d=" << csv::num(scores.miou_2d)
            << " miou_3d=" << csv::num(scores.miou_3d)
            << " miou_avg=" << csv::num(scores.miou_avg) << "\n";
  return kExitOk;
}

int cmd_sweep(const GlobalOptions& opts) {
  const RunConfig rc = load_config(opts);
  const ExperimentConfig& e = rc.experiment;

  std::vector<SweepRow> all_rows;
  std::vector<double> fractions = rc.sweep_fractions;
  std::sort(fractions.begin(), fractions.end());
  for (int s = 0; s < rc.sweep_seeds; ++s) {
    const uint64_t seed = derive_seed(e.seed, "sweep", static_cast<uint64_t>(s));
    ExperimentConfig run = e;
    run.seed = seed;
    const SweepModels models = train_sweep_models(run, seed);
    const std::vector<ScenePair> target =
        synth_scenes(run, run.target, "target", run.eval_scenes, seed);
    const SweepResult result = misalignment_sweep(
        {{"area", &models.area}, {"point", &models.point}}, target, run.grid,
        fractions, {seed}, run.perturb_radius_px);
    all_rows.insert(all_rows.end(), result.rows.begin(), result.rows.end());
  }

  const fs::path out(rc.out_dir);
  fs::create_directories(out);
  csv::Writer w((out / "sweep.csv").string());
  w.row({"method", "fraction", "seed", "miou_2d", "miou_3d", "miou_avg"});
  for (const SweepRow& row : all_rows) {
    w.row({row.method, csv::num(row.fraction), csv::num(row.seed),
           csv::num(row.scores.miou_2d), csv::num(row.scores.miou_3d),
           csv::num(row.scores.miou_avg)});
  }

  // Mean Avg-mIoU per (method, fraction) for the plot.
  std::vector<svg::Series> series;
  for (const std::string& method : {std::string("area"), std::string("point")}) {
    svg::Series s;
    s.name = method == "area" ? "area-to-area" : "point-to-point";
    s.color = method == "area" ? "#4477aa" : "#ee6677";
    for (double fraction : fractions) {
      double sum = 0.0;
      int n = 0;
      for (const SweepRow& row : all_rows) {
        if (row.method == method && row.fraction == fraction) {
          sum += row.scores.miou_avg;
          ++n;
        }
      }
      if (n > 0) s.points.emplace_back(fraction, sum / n);
    }
    series.push_back(std::move(s));
  }
  svg::write_line_plot((out / "sweep.svg").string(),
                       "Avg mIoU vs projection misalignment",
                       "perturbed fraction", "Avg mIoU", series);
  std::cout << "sweep: " << all_rows.size() << " rows -> "
            << (out / "sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_dg(const GlobalOptions& opts) {
  const RunConfig rc = load_config(opts);
  const ExperimentConfig& e = rc.experiment;
  std::vector<uint64_t> seeds;
  for (int s = 0; s < rc.dg_seeds; ++s) {
    seeds.push_back(derive_seed(e.seed, "dg", static_cast<uint64_t>(s)));
  }
  const std::vector<DgRow> rows = dg_experiment(e, seeds);

  const fs::path out(rc.out_dir);
  fs::create_directories(out);
  csv::Writer w((out / "dg.csv").string());
  w.row({"variant", "baf", "bdcl", "miou_2d", "miou_3d", "miou_avg", "seed"});
  for (const DgRow& row : rows) {
    w.row({row.variant, row.baf ? "1" : "0", row.bdcl ? "1" : "0",
           csv::num(row.scores.miou_2d), csv::num(row.scores.miou_3d),
           csv::num(row.scores.miou_avg), csv::num(row.seed)});
  }
  std::cout << "dg: " << rows.size() << " rows -> " << (out / "dg.csv").string()
            << "\n";
  return kExitOk;
}

int cmd_hist(const GlobalOptions& opts, const std::string& bins_flag) {
  RunConfig rc = load_config(opts);
  if (!bins_flag.empty()) {
    std::vector<uint32_t> edges;
    std::istringstream ss(bins_flag);
    std::string item;
    while (std::getline(ss, item, ',')) {
      edges.push_back(static_cast<uint32_t>(std::stoul(item)));
    }
    if (edges.size() != 3) {
      throw InvalidArgument("--bins needs exactly 3 edges, e.g. 1,10,50");
    }
    rc.hist_bins = HistogramBins{edges[0], edges[1], edges[2]};
    rc.hist_bins.validate();
  }
  const ExperimentConfig& e = rc.experiment;

  const fs::path out(rc.out_dir);
  fs::create_directories(out);
  csv::Writer w((out / "hist.csv").string());
  w.row({"domain_tag", "n_low", "n_mid", "n_high", "n_all", "pct_low",
         "pct_mid", "pct_high"});
  std::vector<svg::BarGroup> groups;
  for (const RoleSpec& role : roles(e)) {
    AreaHistogram total;
    for (const ScenePair& pair : load_role_scenes(rc, role.role)) {
      const AreaHistogram h =
          area_histogram(count_grid(pair.cloud, e.grid), rc.hist_bins);
      total.n_low += h.n_low;
      total.n_mid += h.n_mid;
      total.n_high += h.n_high;
      total.n_all += h.n_all;
    }
    const double all = total.n_all > 0 ? static_cast<double>(total.n_all) : 1.0;
    const double pl = total.n_low / all;
    const double pm = total.n_mid / all;
    const double ph = total.n_high / all;
    w.row({role.lidar->domain_tag, csv::num(total.n_low),
           csv::num(total.n_mid), csv::num(total.n_high), csv::num(total.n_all),
           csv::num(pl), csv::num(pm), csv::num(ph)});
    groups.push_back({role.lidar->domain_tag, {pl, pm, ph}});
  }
  char low[32], mid[32], high[32];
  std::snprintf(low, sizeof(low), "[%u,%u)", rc.hist_bins.start,
                rc.hist_bins.mid_start);
  std::snprintf(mid, sizeof(mid), "[%u,%u)", rc.hist_bins.mid_start,
                rc.hist_bins.high_start);
  std::snprintf(high, sizeof(high), "[%u,+inf)", rc.hist_bins.high_start);
  svg::write_bar_chart((out / "hist.svg").string(),
                       "BEV area population distribution", {low, mid, high},
                       groups);
  std::cout << "hist: wrote " << (out / "hist.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BEV domain-generalization experiments on synthetic scenes"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "Run configuration file")
      ->required();
  app.add_option("--out", opts.out_dir, "Output directory (overrides config)");
  uint64_t seed_value = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_value, "Seed override (overrides config)");
  double cell_size = 0.0;
  auto* cell_opt = app.add_option("--cell-size", cell_size,
                                  "BEV cell size in meters (override)");
  int grid_w = 0, grid_l = 0;
  auto* gw_opt = app.add_option("--grid-w", grid_w, "BEV cells along x");
  auto* gl_opt = app.add_option("--grid-l", grid_l, "BEV cells along y");

  auto* synth = app.add_subcommand("synth", "Generate scene pairs per domain");
  int count = -1;
  synth->add_option("--count", count, "Scenes per domain role");
  auto* train_cmd = app.add_subcommand("train", "Train on synthesized scenes");
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string checkpoint;
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint path");
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Misalignment robustness sweep");
  auto* dg_cmd = app.add_subcommand("dg", "Domain-generalization ablation");
  auto* hist_cmd = app.add_subcommand("hist", "BEV area population report");
  std::string bins_flag;
  hist_cmd->add_option("--bins", bins_flag, "Histogram bin edges, e.g. 1,10,50");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" ? kExitOk : kExitConfig;
  }

  try {
    if (seed_opt->count() > 0) opts.seed = seed_value;
    if (cell_opt->count() > 0) opts.cell_size = cell_size;
    if (gw_opt->count() > 0) opts.grid_w = grid_w;
    if (gl_opt->count() > 0) opts.grid_l = grid_l;
    if (synth->parsed()) return cmd_synth(opts, count);
    if (train_cmd->parsed()) return cmd_train(opts);
    if (eval_cmd->parsed()) return cmd_eval(opts, checkpoint);
    if (sweep_cmd->parsed()) return cmd_sweep(opts);
    if (dg_cmd->parsed()) return cmd_dg(opts);
    if (hist_cmd->parsed()) return cmd_hist(opts, bins_flag);
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
