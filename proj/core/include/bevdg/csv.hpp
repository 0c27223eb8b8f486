#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "bevdg/common.hpp"

namespace bevdg::csv {

// Deterministic number formatting shared by all CSV/SVG emitters.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string num(uint64_t v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path) {
    if (!out_) throw IoError("cannot open for write: " + path);
    path_ = path;
  }

  void row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace bevdg::csv
