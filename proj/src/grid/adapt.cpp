#include "okt/grid/adapt.hpp"

#include <map>

#include "okt/grid/halo.hpp"
#include "okt/grid/refine.hpp"

namespace okt::grid {

namespace {

std::size_t split_round(Octree& tree, const std::vector<TreeKey>& keys) {
  exchange_halos(tree);
  std::size_t done = 0;
  for (const auto& k : keys) {
    const TreeNode* nd = tree.find(k);
    if (!nd || !nd->leaf) continue;
    auto children = refine_subgrid(nd->grid);
    tree.refine(k);
    for (int c = 0; c < 8; ++c) tree.node(k.child(c)).grid = std::move(children[c]);
    ++done;
  }
  return done;
}

}  // namespace

std::size_t refine_leaves(Octree& tree, const std::vector<TreeKey>& leaves) {
  // Work out the final topology first, then split level by level from the
  // coarsest: every intermediate tree is graded, so halos stay resolvable.
  Octree topo(tree.config());
  auto& tn = topo.nodes();
  tn.clear();
  for (const auto& [k, nd] : tree.nodes()) tn.emplace(k, TreeNode{k, nd.leaf, nd.locality, SubGrid{}});
  for (const auto& k : leaves)
    if (topo.contains(k)) topo.refine(k);
  topo.enforce_gradedness();
  std::map<std::uint32_t, std::vector<TreeKey>> by_level;
  for (const auto& [k, nd] : tn) {
    const TreeNode* old = tree.find(k);
    if (!nd.leaf && (!old || old->leaf)) by_level[k.level].push_back(k);
  }
  std::size_t total = 0;
  for (const auto& [level, keys] : by_level) total += split_round(tree, keys);
  tree.restrict_all();
  return total;
}

std::size_t refine_where(Octree& tree, const RefinePredicate& pred) {
  std::vector<TreeKey> sel;
  for (const auto& k : tree.leaves())
    if (pred(k)) sel.push_back(k);
  return refine_leaves(tree, sel);
}

}  // namespace okt::grid
