#pragma once

#include <vector>

#include "okt/grid/octree.hpp"

namespace okt::grid {

// Splits the given leaves with conservative interpolation of their data
// (ghosts refreshed first so block-edge slopes see neighbors), then splits
// whatever gradedness requires the same way, and finally re-restricts
// interior nodes. Returns the number of nodes split.
std::size_t refine_leaves(Octree& tree, const std::vector<TreeKey>& leaves);

std::size_t refine_where(Octree& tree, const RefinePredicate& pred);

}  // namespace okt::grid
