#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "okt/fmm/interactions.hpp"
#include "okt/fmm/multipole.hpp"
#include "okt/grid/octree.hpp"

namespace okt::testing {

inline int local_index(int n, int i, int j, int k) { return (i * n + j) * n + k; }

// Every pair of leaf cells must be covered exactly once by what the engine
// actually evaluates, counting coverage through ancestors (downward shifts)
// and descendants (a coarse partner stands for all its leaves).
inline std::size_t coverage_defects(const grid::Octree& tree, const fmm::Stencil& st) {
  const fmm::MultipoleTree mt = fmm::compute_moments(tree, 3);
  const int n = tree.config().n;
  const int cells = n * n * n;
  std::map<grid::TreeKey, std::size_t> base;
  std::size_t total = 0;
  for (const auto& [k, nd] : tree.nodes())
    if (nd.leaf) {
      base[k] = total;
      total += cells;
    }
  std::map<grid::TreeKey, std::vector<std::vector<std::pair<grid::TreeKey, int>>>> partners;
  for (const auto& [k, nd] : tree.nodes()) {
    auto& v = partners[k];
    v.resize(cells);
    fmm::PairObserver obs = [&](int l, const grid::TreeKey& pk, int pl) { v[l].push_back({pk, pl}); };
    fmm::node_interactions_all(mt, k, st, nullptr, &obs);
  }
  std::function<void(const grid::TreeKey&, int, std::vector<int>&)> leaves_of = [&](const grid::TreeKey& k, int l,
                                                                               std::vector<int>& count) {
    if (tree.node(k).leaf) {
      ++count[base.at(k) + l];
      return;
    }
    const int i = l / (n * n), j = (l / n) % n, kk = l % n;
    for (int o = 0; o < 8; ++o) {
      const int ci = 2 * i + (o & 1), cj = 2 * j + ((o >> 1) & 1), ck = 2 * kk + ((o >> 2) & 1);
      const int node = (ci / n) | ((cj / n) << 1) | ((ck / n) << 2);
      leaves_of(k.child(node), local_index(n, ci % n, cj % n, ck % n), count);
    }
  };
  std::size_t defects = 0;
  std::vector<int> count(total);
  for (const auto& [k, b] : base) {
    for (int l = 0; l < cells; ++l) {
      std::fill(count.begin(), count.end(), 0);
      grid::TreeKey a = k;
      int al = l;
      while (true) {
        for (const auto& [pk, pl] : partners.at(a)[al]) leaves_of(pk, pl, count);
        if (a.level == 0) break;
        const grid::TreeKey pa = a.parent();
        const int gi = static_cast<int>(a.idx[0]) * n + al / (n * n), gj = static_cast<int>(a.idx[1]) * n + (al / n) % n,
                  gk = static_cast<int>(a.idx[2]) * n + al % n;
        al = local_index(n, (gi >> 1) - static_cast<int>(pa.idx[0]) * n, (gj >> 1) - static_cast<int>(pa.idx[1]) * n,
                         (gk >> 1) - static_cast<int>(pa.idx[2]) * n);
        a = pa;
      }
      for (std::size_t y = 0; y < total; ++y) {
        const int want = y == b + l ? 0 : 1;
        defects += count[y] != want;
      }
    }
  }
  return defects;
}

}  // namespace okt::testing
