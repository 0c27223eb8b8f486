#pragma once

#include <map>
#include <string>
#include <vector>

#include "bevdg/dvm.hpp"
#include "bevdg/harness.hpp"

namespace bevdg {

// Flat key = value configuration file with dotted sections, '#' comments
// and blank lines. Unknown keys are rejected so typos surface as config
// errors instead of silently using defaults.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  // Throws InvalidArgument listing any key never consumed by a getter.
  void check_all_consumed() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> consumed_;
};

// Aggregated run settings for the CLI: the experiment plus command knobs.
struct RunConfig {
  ExperimentConfig experiment;
  std::string out_dir = "out";
  int synth_count = 12;           // scenes per role for `synth`
  std::vector<double> sweep_fractions{0.0, 0.05, 0.2, 0.5, 1.0};
  int sweep_seeds = 5;
  int dg_seeds = 5;
  HistogramBins hist_bins;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_kv(const KeyValueFile& kv);
};

}  // namespace bevdg
