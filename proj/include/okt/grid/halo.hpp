#pragma once

#include <functional>
#include <vector>

#include "okt/grid/octree.hpp"

namespace okt::grid {

// What a ghost fill can see of one node: whether it exists, whether it is a
// leaf, and its interior data if available.
struct NodeRef {
  bool exists = false;
  bool leaf = false;
  const SubGrid* grid = nullptr;
};

using FieldSource = std::function<NodeRef(const TreeKey&)>;

FieldSource tree_source(const Octree& tree);

struct HaloDataMissing : std::runtime_error {
  TreeKey key;
  HaloDataMissing(const TreeKey& k) : std::runtime_error("halo data missing for " + k.str()), key(k) {}
};

// Fills every ghost cell of `grid` (node `key`). Same-level leaves are copied,
// refined neighbors are averaged from their leaves, and missing neighbors are
// interpolated from the covering coarse leaf. Physical boundaries apply
// cfg.boundary first.
void fill_ghosts(SubGrid& grid, const TreeKey& key, const GridConfig& cfg, const FieldSource& src);

void exchange_halos(Octree& tree);

// Leaf keys (other than `key`) whose interior data fill_ghosts reads, sorted.
std::vector<TreeKey> halo_dependencies(const Octree& tree, const TreeKey& key);

// Boundary fill of a standalone block from its own interior.
void fill_block_boundary(SubGrid& grid, Boundary b);

}  // namespace okt::grid
