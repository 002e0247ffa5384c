#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "okt/grid/octree.hpp"
#include "okt/harness/config.hpp"

namespace okt::harness {

struct NoReference : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct FieldNorm {
  std::string field;
  double l1 = 0;    // volume-weighted mean of |q - q_ref|
  double linf = 0;  // max |q - q_ref|
};

struct ReferenceReport {
  std::string scenario;
  double time = 0;
  std::vector<FieldNorm> norms;  // empty when only symmetry is checked
  double symmetry = 0;           // octant mirror deviation, relative
  const FieldNorm& norm(const std::string& field) const;
};

// sod: exact Riemann solution in the conserved fields rho, sx, egas.
// sedov: octant-mirror deviation only. Other scenarios have no reference.
ReferenceReport compare_to_reference(const grid::Octree& tree, const RunConfig& cfg, double time);

// Max over fields and the 7 mirror images of |q - q'| / max |q|, with the
// mirrored momentum components negated. Infinite when the tree itself is not
// mirror symmetric.
double octant_symmetry_deviation(const grid::Octree& tree);

struct ConvergenceRow {
  int cells = 0;
  double l1_rho = 0;
  double linf_rho = 0;
  double order = 0;  // against the previous row; 0 for the first
};

// Standalone x pencils of the configured sod states to time t.
std::vector<ConvergenceRow> sod_convergence(const std::vector<int>& cells, const RunConfig& cfg, double t);

}  // namespace okt::harness
