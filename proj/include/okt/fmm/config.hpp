#pragma once

#include <stdexcept>
#include <string>

namespace okt::fmm {

struct FmmConfig {
  double theta = 0.5;
  int p = 3;  // expansion order; 2 and 3 are supported
  double G = 1.0;

  void validate() const {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1], got " + std::to_string(theta));
    if (p < 2 || p > 3) throw std::invalid_argument("expansion order must be 2 or 3, got " + std::to_string(p));
  }
};

}  // namespace okt::fmm
