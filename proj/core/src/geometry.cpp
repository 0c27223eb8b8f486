#include "bevdg/geometry.hpp"

#include <algorithm>

namespace bevdg {

double Mat3::orthonormality_error() const {
  double err = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += m[i * 3 + k] * m[j * 3 + k];
      err = std::max(err, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return err;
}

}  // namespace bevdg
