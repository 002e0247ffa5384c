#pragma once

#include <array>

#include "okt/grid/subgrid.hpp"

namespace okt::grid {

double minmod(double a, double b);

// Value of the child cell of coarse cell (i,j,k) whose center is offset by
// sign[d] * h_coarse / 4 along each axis. Slopes are minmod-limited and use
// neighbors within [-reach, n + reach) only; missing neighbors give a zero
// slope. Mass fractions are carried by the coarse cell's composition.
State prolong_cell(const SubGrid& coarse, int i, int j, int k, const std::array<int, 3>& sign, int reach);

// Splits an n^3 parent into its 8 children (child c holds the octant with x
// offset bit 0, y bit 1, z bit 2). Ghost layers of the parent, when present,
// supply slopes at the block edge. Children get zeroed ghosts.
std::array<SubGrid, 8> refine_subgrid(const SubGrid& parent);

// Conservative average of 8 children (pairwise summed) into the parent
// interior.
void restrict_into(SubGrid& parent, const SubGrid* const children[8]);
SubGrid restrict_children(const std::array<SubGrid, 8>& children, const SubGrid& like);

}  // namespace okt::grid
