#include <doctest.h>

#include "bevdg/run_config.hpp"

using namespace bevdg;

TEST_CASE("key-value parsing: comments, whitespace, duplicates") {
  const KeyValueFile kv = KeyValueFile::parse_string(
      "# a comment\n"
      "seed = 12  # trailing comment\n"
      "\n"
      "grid.cell_size=0.25\n"
      "model.fusion = point\n");
  CHECK(kv.get_u64("seed", 0) == 12);
  CHECK(kv.get_double("grid.cell_size", 0.5) == 0.25);
  CHECK(kv.get_string("model.fusion", "area") == "point");
  CHECK(kv.get_int("missing", 3) == 3);

  CHECK_THROWS_AS(KeyValueFile::parse_string("a = 1\na = 2\n"),
                  InvalidArgument);
  CHECK_THROWS_AS(KeyValueFile::parse_string("novalue\n"), InvalidArgument);
}

TEST_CASE("run config: defaults carry the published settings") {
  const RunConfig rc = RunConfig::from_kv(KeyValueFile::parse_string(""));
  const ExperimentConfig& e = rc.experiment;
  CHECK(e.grid.cell_size == 0.5);
  CHECK(e.hyper.tau == 0.01);
  CHECK(e.hyper.lambda_ct == 0.01);
  CHECK(e.hyper.lr == 1e-3);
  CHECK(e.hyper.beta1 == 0.9);
  CHECK(e.hyper.beta2 == 0.999);
  CHECK(e.hyper.batch_size == 8);
  CHECK(e.source1.beam_count == 16);
  CHECK(e.source2.beam_count == 64);
  CHECK(e.target.beam_count == 32);
  CHECK(e.model.fusion == FusionMode::kArea);
  CHECK(e.model.bdcl);
  CHECK(rc.sweep_fractions == std::vector<double>{0.0, 0.05, 0.2, 0.5, 1.0});
}

TEST_CASE("run config: overrides reach the right fields") {
  const RunConfig rc = RunConfig::from_kv(KeyValueFile::parse_string(
      "seed = 99\n"
      "out = mydir\n"
      "grid.w = 32\n"
      "grid.l = 16\n"
      "grid.cell_size = 1.0\n"
      "lidar.source1.beams = 8\n"
      "hyper.iterations = 5\n"
      "model.fusion = none\n"
      "model.bdcl = false\n"
      "hist.bins = 1,5,20\n"));
  CHECK(rc.experiment.seed == 99);
  CHECK(rc.out_dir == "mydir");
  CHECK(rc.experiment.grid.cells_x == 32);
  CHECK(rc.experiment.grid.cells_y == 16);
  // Origin is recentered from the grid dimensions when not given.
  CHECK(rc.experiment.grid.origin_y == -8.0);
  CHECK(rc.experiment.source1.beam_count == 8);
  CHECK(rc.experiment.hyper.iterations == 5);
  CHECK(rc.experiment.model.fusion == FusionMode::kNone);
  CHECK(!rc.experiment.model.bdcl);
  CHECK(rc.hist_bins.mid_start == 5);
  CHECK(rc.hist_bins.high_start == 20);
}

TEST_CASE("run config: unknown keys and malformed values are rejected") {
  CHECK_THROWS_AS(
      RunConfig::from_kv(KeyValueFile::parse_string("grid.sizo = 0.5\n")),
      InvalidArgument);
  CHECK_THROWS_AS(
      RunConfig::from_kv(KeyValueFile::parse_string("hyper.tau = abc\n")),
      InvalidArgument);
  CHECK_THROWS_AS(
      RunConfig::from_kv(KeyValueFile::parse_string("hyper.tau = 0\n")),
      InvalidArgument);
  CHECK_THROWS_AS(
      RunConfig::from_kv(KeyValueFile::parse_string("hist.bins = 1,5\n")),
      InvalidArgument);
  CHECK_THROWS_AS(
      RunConfig::from_kv(KeyValueFile::parse_string("model.fusion = blend\n")),
      InvalidArgument);
}
