#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "okt/grid/subgrid.hpp"
#include "okt/grid/tree_key.hpp"

namespace okt::grid {

enum class Boundary { Outflow, Periodic, Reflecting };

const char* to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct GridConfig {
  int n = 8;
  int ghost = 2;
  double length = 1.0;
  std::array<double, 3> origin{0.0, 0.0, 0.0};  // lower domain corner
  Boundary boundary = Boundary::Outflow;

  double h(std::uint32_t level) const { return length / (n * static_cast<double>(1u << level)); }
  // Cells per edge of the whole domain at `level`.
  std::int64_t cells(std::uint32_t level) const { return static_cast<std::int64_t>(n) << level; }
};

struct GradednessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TreeNode {
  TreeKey key;
  bool leaf = true;
  int locality = 0;
  SubGrid grid;
};

// Adaptive octree of n^3 sub-grids. Nodes are kept in (level, sfc) order.
class Octree {
 public:
  explicit Octree(GridConfig cfg = {});

  const GridConfig& config() const noexcept { return cfg_; }

  bool contains(const TreeKey& k) const { return nodes_.count(k) != 0; }
  TreeNode& node(const TreeKey& k);
  const TreeNode& node(const TreeKey& k) const;
  TreeNode* find(const TreeKey& k);
  const TreeNode* find(const TreeKey& k) const;

  std::map<TreeKey, TreeNode>& nodes() noexcept { return nodes_; }
  const std::map<TreeKey, TreeNode>& nodes() const noexcept { return nodes_; }

  // Splits a leaf into 8 children with empty (zero) sub-grids.
  void refine(const TreeKey& k);
  // Refines until every node at level >= 2 has all 26 neighbors of its parent
  // present, which keeps adjacent leaves within one level. Returns the number
  // of extra refinements performed.
  std::size_t enforce_gradedness();
  bool is_graded() const;
  // Leaves that must be split for the tree to become graded.
  std::vector<TreeKey> gradedness_violations() const;

  // Same-level neighbor position, wrapped for periodic domains; nullopt when
  // outside a non-periodic domain. Does not require the node to exist.
  std::optional<TreeKey> neighbor_key(const TreeKey& k, int dx, int dy, int dz) const;
  std::vector<TreeKey> neighbor_keys(const TreeKey& k) const;  // existing ones only

  std::vector<TreeKey> leaves() const;
  std::vector<TreeKey> level_keys(std::uint32_t level) const;
  std::size_t leaf_count() const;
  std::uint32_t max_level() const;
  std::uint32_t level_count() const { return max_level() + 1; }
  // Nodes per level (all nodes, including interior ones).
  std::vector<std::size_t> level_node_counts() const;
  std::vector<std::size_t> level_leaf_counts() const;

  // Center of interior cell (0,0,0) of node k.
  std::array<double, 3> node_origin(const TreeKey& k) const;
  SubGrid make_grid(const TreeKey& k) const;

  // Restricts leaf data into every interior node, finest first.
  void restrict_all();

  // Volume-weighted totals over leaves, summed in leaf order.
  State leaf_totals() const;

 private:
  GridConfig cfg_;
  std::map<TreeKey, TreeNode> nodes_;
};

using RefinePredicate = std::function<bool(const TreeKey&)>;

// Builds a tree with at most `levels` levels (levels=1: root only). The
// predicate is consulted for every node above the last level; gradedness is
// then enforced. Sub-grids are allocated and zeroed.
Octree build_tree(const GridConfig& cfg, int levels, const RefinePredicate& refine);
Octree build_uniform_tree(const GridConfig& cfg, int levels);

// Cuts leaves in (level, sfc) order into L contiguous balanced chunks and
// co-locates interior nodes with their first child. Returns leaf counts per
// locality.
std::vector<std::size_t> partition(Octree& tree, int localities);

}  // namespace okt::grid
