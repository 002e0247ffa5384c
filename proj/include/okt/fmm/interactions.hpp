#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "okt/fmm/multipole.hpp"
#include "okt/fmm/stencil.hpp"

namespace okt::fmm {

// Named by (own cell kind)_(partner kind): refined cells carry multipoles,
// leaf cells are monopoles.
enum class KernelClass : int { MultipoleMultipole = 0, MultipoleMonopole, MonopoleMultipole, MonopoleMonopole };
inline constexpr int kNumKernelClasses = 4;

const char* kernel_class_name(KernelClass c);

inline KernelClass classify(bool self_leaf, bool partner_leaf) {
  if (self_leaf) return partner_leaf ? KernelClass::MonopoleMonopole : KernelClass::MonopoleMultipole;
  return partner_leaf ? KernelClass::MultipoleMonopole : KernelClass::MultipoleMultipole;
}

// The two classes a node's cells can take part in.
inline std::array<KernelClass, 2> node_kernel_classes(bool leaf) {
  if (leaf) return {KernelClass::MonopoleMultipole, KernelClass::MonopoleMonopole};
  return {KernelClass::MultipoleMultipole, KernelClass::MultipoleMonopole};
}

struct InteractionCounters {
  std::array<std::uint64_t, kNumKernelClasses> pairs{};
  std::array<std::uint64_t, kNumKernelClasses> launches{};
  void merge(const InteractionCounters& o) {
    for (int i = 0; i < kNumKernelClasses; ++i) {
      pairs[i] += o.pairs[i];
      launches[i] += o.launches[i];
    }
  }
};

using TaylorSet = std::vector<CellTaylor>;

// Test hook: called once per evaluated pair with the own cell and the partner.
using PairObserver = std::function<void(int local, const TreeKey& partner, int partner_local)>;

// Cell a at level la separated from cell b at level lb >= la: center distance
// at least R cell widths of level lb.
bool separated(std::uint32_t la, const std::array<std::int64_t, 3>& ga, std::uint32_t lb,
               const std::array<std::int64_t, 3>& gb, double radius2);

// Contributions of one kernel class to every cell of node `key`, from:
//  - same-level partners in the stencil that are far, or near with both leaves;
//  - for leaf nodes, finer cells inside near refined partners, descending until
//    they are separated or leaves;
//  - the mirror of that descent: coarse leaf cells that reach this cell.
// Each partner is processed in a fixed order, so results do not depend on how
// nodes are scheduled.
TaylorSet node_interactions(const MultipoleTree& mt, const TreeKey& key, const Stencil& st, KernelClass cls,
                            InteractionCounters* counters = nullptr, const PairObserver* observer = nullptr);

// Both classes of the node, summed class by class in enum order.
TaylorSet node_interactions_all(const MultipoleTree& mt, const TreeKey& key, const Stencil& st,
                                InteractionCounters* counters = nullptr, const PairObserver* observer = nullptr);

void accumulate(TaylorSet& into, const TaylorSet& add);

}  // namespace okt::fmm
