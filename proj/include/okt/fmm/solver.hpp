#pragma once

#include <array>
#include <map>
#include <vector>

#include "okt/fmm/interactions.hpp"
#include "okt/runtime/scheduler.hpp"

namespace okt::fmm {

struct GravityCell {
  double phi = 0.0;
  std::array<double, 3> g{0, 0, 0};
  friend bool operator==(const GravityCell&, const GravityCell&) = default;
};

using GravityBlock = std::vector<GravityCell>;

struct GravityField {
  std::map<TreeKey, GravityBlock> leaves;
  InteractionCounters counters;
};

// Taylor set of node `key`: its own interactions plus the parent's expansion
// shifted to each cell's center. `parent` may be null at the root.
TaylorSet propagate_node(const MultipoleTree& mt, const TreeKey& key, TaylorSet own, const TaylorSet* parent);

// Phi = G L0, g = G (-L1 + c).
GravityBlock extract_field(const TaylorSet& t, double G);

GravityField solve_gravity(const grid::Octree& tree, const FmmConfig& cfg, const Stencil& st);
GravityField solve_gravity(const grid::Octree& tree, const FmmConfig& cfg);

// Same result, expressed as per-node futures on `sched`: moments bottom-up,
// interactions per node, propagation top-down.
GravityField solve_gravity_tasks(const grid::Octree& tree, const FmmConfig& cfg, const Stencil& st,
                                 runtime::Scheduler& sched);

// One point mass per leaf cell, in tree order.
struct PointMass {
  TreeKey key;
  int local;
  double m;
  std::array<double, 3> x;
};
std::vector<PointMass> leaf_points(const grid::Octree& tree);

// O(N^2) Newtonian sum over all leaf cells, skipping self.
std::vector<GravityCell> direct_sum_oracle(const std::vector<PointMass>& pts, double G);

// Flattens a field in leaf_points order.
std::vector<GravityCell> flatten(const GravityField& f, const std::vector<PointMass>& pts);

struct ConservationResiduals {
  std::array<double, 3> force{0, 0, 0};   // sum m g
  std::array<double, 3> torque{0, 0, 0};  // sum X x m g
  double force_scale = 0.0;               // sum |m| |g|
  double torque_scale = 0.0;              // sum |X| |m| |g|
  double force_rel() const;
  double torque_rel() const;
};
ConservationResiduals conservation_residuals(const std::vector<PointMass>& pts, const std::vector<GravityCell>& g);

// max |g - ref| / max |ref|
double linf_relative_error(const std::vector<GravityCell>& g, const std::vector<GravityCell>& ref);

}  // namespace okt::fmm
