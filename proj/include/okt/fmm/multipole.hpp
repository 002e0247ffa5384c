#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "okt/fmm/kernels.hpp"
#include "okt/grid/octree.hpp"

namespace okt::fmm {

using grid::TreeKey;

// n^3 cells of one node, x slowest.
using MultipoleSet = std::vector<CellMultipole>;

struct NegativeDensity : std::runtime_error {
  TreeKey key;
  NegativeDensity(const TreeKey& k, double rho)
      : std::runtime_error("negative density " + std::to_string(rho) + " in " + k.str()), key(k) {}
};

// Leaf cells are point masses at their centers.
MultipoleSet leaf_moments(const grid::SubGrid& grid, const TreeKey& key);

// Parent cells from the 8 children nodes (child c = key.child(c)). Empty
// cells sit at their geometric center.
MultipoleSet combine_moments(const TreeKey& key, const std::array<const MultipoleSet*, 8>& children,
                             const grid::GridConfig& cfg, int p);

struct MultipoleNode {
  bool leaf = true;
  std::shared_ptr<const MultipoleSet> mp;
};

// Moment data for the whole tree, shared read-only by interaction kernels.
class MultipoleTree {
 public:
  MultipoleTree(grid::GridConfig cfg, int p) : cfg_(cfg), p_(p) {}

  const grid::GridConfig& config() const { return cfg_; }
  int order() const { return p_; }

  void set(const TreeKey& k, bool leaf, std::shared_ptr<const MultipoleSet> mp) { nodes_[k] = {leaf, std::move(mp)}; }
  const MultipoleNode* find(const TreeKey& k) const {
    auto it = nodes_.find(k);
    return it == nodes_.end() ? nullptr : &it->second;
  }
  const std::map<TreeKey, MultipoleNode>& nodes() const { return nodes_; }
  std::uint32_t max_level() const { return nodes_.empty() ? 0 : nodes_.rbegin()->first.level; }

 private:
  grid::GridConfig cfg_;
  int p_;
  std::map<TreeKey, MultipoleNode> nodes_;
};

// Serial P2M + M2M over the tree. Rejects ungraded trees.
MultipoleTree compute_moments(const grid::Octree& tree, int p);

// Geometric center of cell `local` (x slowest linear index) of node `key`.
std::array<double, 3> cell_center(const grid::GridConfig& cfg, const TreeKey& key, int local);

}  // namespace okt::fmm
