#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace std;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig =
    "seed = 5\n"
    "world.cars = 2\n"
    "world.trucks = 1\n"
    "world.bikes = 1\n"
    "world.persons = 2\n"
    "world.place_x_max = 20\n"
    "lidar.source1.beams = 16\n"
    "lidar.source1.azimuth_step = 6\n"
    "lidar.source2.beams = 64\n"
    "lidar.source2.azimuth_step = 6\n"
    "lidar.target.beams = 32\n"
    "lidar.target.azimuth_step = 6\n"
    "camera.width = 96\n"
    "camera.height = 72\n"
    "camera.fx = 80\n"
    "camera.fy = 80\n"
    "camera.cx = 48\n"
    "camera.cy = 36\n"
    "grid.w = 16\n"
    "grid.l = 16\n"
    "grid.cell_size = 2\n"
    "model.hidden2d = 6\n"
    "model.hidden3d = 6\n"
    "model.c2d = 6\n"
    "model.c3d = 6\n"
    "model.fc1_out = 8\n"
    "model.fc2_out = 8\n"
    "hyper.batch_size = 2\n"
    "hyper.iterations = 4\n"
    "hyper.val_interval = 2\n"
    "data.train_scenes = 2\n"
    "data.eval_scenes = 2\n";

int run(const std::string& args) {
  const std::string cmd = std::string(BEVDG_CLI_PATH) + " " + args +
                          " >cli_stdout.log 2>cli_stderr.log";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct CliFixture {
  fs::path dir;
  fs::path config;

  CliFixture() {
    dir = fs::path("cli_test_out");
    fs::remove_all(dir);
    fs::create_directories(dir);
    config = dir / "run.cfg";
    std::ofstream(config) << kTinyConfig;
  }
  ~CliFixture() { fs::remove_all(dir); }

  std::string base_args() const {
    return "--config " + config.string() + " --out " + (dir / "run").string();
  }
};

}  // namespace

TEST_CASE("cli: synth is re-runnable bit-identically and count=0 works") {
  CliFixture fx;
  REQUIRE(run(fx.base_args() + " synth --count 2") == 0);
  const fs::path manifest = fx.dir / "run" / "scenes" / "manifest.txt";
  REQUIRE(fs::exists(manifest));
  const std::string first = slurp(manifest);
  // 3 roles x 2 scenes + header line.
  CHECK(std::count(first.begin(), first.end(), '\n') == 7);

  REQUIRE(run(fx.base_args() + " synth --count 2") == 0);
  CHECK(slurp(manifest) == first);

  REQUIRE(run(fx.base_args() + " synth --count 0") == 0);
  const std::string empty = slurp(manifest);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);
}

TEST_CASE("cli: train -> eval -> hist pipeline with deterministic artifacts") {
  CliFixture fx;
  REQUIRE(run(fx.base_args() + " synth --count 2") == 0);
  REQUIRE(run(fx.base_args() + " train") == 0);
  const fs::path ckpt = fx.dir / "run" / "checkpoint.bdgm";
  const fs::path metrics = fx.dir / "run" / "metrics.csv";
  REQUIRE(fs::exists(ckpt));
  REQUIRE(fs::exists(metrics));
  const std::string ckpt1 = slurp(ckpt);
  const std::string metrics1 = slurp(metrics);

  REQUIRE(run(fx.base_args() + " train") == 0);
  CHECK(slurp(ckpt) == ckpt1);
  CHECK(slurp(metrics) == metrics1);

  REQUIRE(run(fx.base_args() + " eval") == 0);
  const std::string eval1 = slurp(fx.dir / "run" / "eval.csv");
  REQUIRE(run(fx.base_args() + " eval") == 0);
  CHECK(slurp(fx.dir / "run" / "eval.csv") == eval1);
  CHECK(eval1.find("miou_2d") == 0);

  REQUIRE(run(fx.base_args() + " hist") == 0);
  const std::string hist1 = slurp(fx.dir / "run" / "hist.csv");
  CHECK(hist1.find("beams16") != std::string::npos);
  CHECK(hist1.find("beams64") != std::string::npos);
  REQUIRE(run(fx.base_args() + " hist --bins 1,5,20") == 0);
  const std::string hist2 = slurp(fx.dir / "run" / "hist.csv");
  CHECK(hist2 != hist1);
  REQUIRE(fs::exists(fx.dir / "run" / "hist.svg"));
}

TEST_CASE("cli: exit codes distinguish config and io failures") {
  CliFixture fx;
  // Unknown key in the config -> 2.
  std::ofstream(fx.dir / "bad.cfg") << "not.a.key = 1\n";
  CHECK(run("--config " + (fx.dir / "bad.cfg").string() + " synth") == 2);
  // Missing config file -> 4 (io).
  CHECK(run("--config " + (fx.dir / "nope.cfg").string() + " synth") == 4);
  // train before synth -> 4 (missing scenes).
  CHECK(run(fx.base_args() + " train") == 4);
  // eval before train -> 4 (missing checkpoint).
  REQUIRE(run(fx.base_args() + " synth --count 1") == 0);
  CHECK(run(fx.base_args() + " eval") == 4);
  // No subcommand -> parse error (2).
  CHECK(run(fx.base_args()) == 2);
}

TEST_CASE("cli: seed override changes artifacts deterministically") {
  CliFixture fx;
  REQUIRE(run(fx.base_args() + " synth --count 1") == 0);
  const std::string a = slurp(fx.dir / "run" / "scenes" / "manifest.txt");
  REQUIRE(run(fx.base_args() + " --seed 6 synth --count 1") == 0);
  const std::string b = slurp(fx.dir / "run" / "scenes" / "manifest.txt");
  CHECK(a != b);
  REQUIRE(run(fx.base_args() + " --seed 6 synth --count 1") == 0);
  CHECK(slurp(fx.dir / "run" / "scenes" / "manifest.txt") == b);
}
