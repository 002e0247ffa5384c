#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "okt/fmm/config.hpp"

namespace okt::fmm {

using Offset = std::array<int, 3>;

struct StencilEntry {
  Offset d;
  std::uint8_t parity_mask;  // bit a set when d is needed by cells of parity a
  bool near;                 // |d| < R: not separated at this level either
  int norm2;
};

// Same-level interaction offsets for one opening parameter. A cell of parity
// a (its index mod 2, packed x | y<<1 | z<<2) interacts with d when the
// parent-level offset floor((a + d) / 2) is shorter than R, i.e. the parents
// were not separated.
struct Stencil {
  double theta = 0.5;
  double radius2 = 9.0;
  std::vector<StencilEntry> offsets;  // lexicographic by d
  std::vector<Offset> near;           // every d != 0 with |d|^2 < R^2, lexicographic
  int max_offset = 0;                 // max |d_i| over offsets

  std::size_t size() const { return offsets.size(); }
  bool contains(const Offset& d) const;
  bool contains(const Offset& d, int parity) const;
  std::size_t near_count() const;

  bool far(const Offset& d) const { return d[0] * d[0] + d[1] * d[1] + d[2] * d[2] >= radius2; }
  bool parents_near(const Offset& parent_d) const {
    return parent_d[0] * parent_d[0] + parent_d[1] * parent_d[1] + parent_d[2] * parent_d[2] < radius2;
  }
};

// R = c / theta with c from calibrate_radius_scale().
double stencil_radius2(double theta);

// Scans c on a 1e-3 grid and returns the largest value whose stencil at
// theta = 0.5 has exactly 1074 offsets (the near-field cut closes there).
// Falls back to the closest count if 1074 were unreachable.
double calibrate_radius_scale();

Stencil generate_stencil(const FmmConfig& cfg);
Stencil generate_stencil_r2(double radius2, double theta = 0.0);

// Offsets under the all-pairs parent rule (d not separated if any pair of
// child positions a, b gives |floor((d + b - a) / 2)| < R), for reporting.
std::size_t all_pairs_rule_count(double radius2);

inline int floor_half(int v) { return v >> 1; }  // arithmetic shift floors negatives

}  // namespace okt::fmm
