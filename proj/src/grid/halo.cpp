#include "okt/grid/halo.hpp"

#include <algorithm>
#include <set>

#include "okt/grid/refine.hpp"

namespace okt::grid {

namespace {

using G3 = std::array<std::int64_t, 3>;

// Maps a global cell index into the domain; each reflection toggles `flipped`
// (normal momentum changes sign).
std::int64_t apply_bc(std::int64_t g, std::int64_t n, Boundary b, bool& flipped) {
  while (g < 0 || g >= n) {
    switch (b) {
      case Boundary::Outflow:
        return std::clamp<std::int64_t>(g, 0, n - 1);
      case Boundary::Periodic:
        return ((g % n) + n) % n;
      case Boundary::Reflecting:
        flipped = !flipped;
        g = g < 0 ? -1 - g : 2 * n - 1 - g;
        break;
    }
  }
  return g;
}

class Resolver {
 public:
  Resolver(const GridConfig& cfg, const FieldSource& src) : cfg_(cfg), src_(src) {}

  State sample(std::uint32_t level, const G3& g) const {
    const std::int64_t n = cfg_.n;
    const TreeKey key(level, {static_cast<std::uint32_t>(g[0] / n), static_cast<std::uint32_t>(g[1] / n),
                              static_cast<std::uint32_t>(g[2] / n)});
    const NodeRef ref = src_(key);
    if (ref.exists && ref.leaf) {
      if (!ref.grid) throw HaloDataMissing(key);
      return ref.grid->state(static_cast<int>(g[0] % n), static_cast<int>(g[1] % n), static_cast<int>(g[2] % n));
    }
    if (ref.exists) {
      State c[8];
      for (int ch = 0; ch < 8; ++ch)
        c[ch] = sample(level + 1, {2 * g[0] + (ch & 1), 2 * g[1] + ((ch >> 1) & 1), 2 * g[2] + ((ch >> 2) & 1)});
      State s;
      for (int f = 0; f < kNumFields; ++f)
        s[f] = 0.125 * (((c[0][f] + c[1][f]) + (c[2][f] + c[3][f])) + ((c[4][f] + c[5][f]) + (c[6][f] + c[7][f])));
      return s;
    }
    if (level == 0) throw GradednessError("root missing");
    const G3 gc{g[0] >> 1, g[1] >> 1, g[2] >> 1};
    const TreeKey ckey(level - 1, {static_cast<std::uint32_t>(gc[0] / n), static_cast<std::uint32_t>(gc[1] / n),
                                   static_cast<std::uint32_t>(gc[2] / n)});
    const NodeRef cref = src_(ckey);
    if (!cref.exists || !cref.leaf)
      throw GradednessError("no coarse leaf covers ghost data near " + key.str());
    if (!cref.grid) throw HaloDataMissing(ckey);
    const std::array<int, 3> sgn{(g[0] & 1) ? 1 : -1, (g[1] & 1) ? 1 : -1, (g[2] & 1) ? 1 : -1};
    return prolong_cell(*cref.grid, static_cast<int>(gc[0] % n), static_cast<int>(gc[1] % n),
                        static_cast<int>(gc[2] % n), sgn, 0);
  }

 private:
  const GridConfig& cfg_;
  const FieldSource& src_;
};

}  // namespace

FieldSource tree_source(const Octree& tree) {
  return [&tree](const TreeKey& k) {
    const TreeNode* nd = tree.find(k);
    if (!nd) return NodeRef{};
    return NodeRef{true, nd->leaf, &nd->grid};
  };
}

void fill_ghosts(SubGrid& grid, const TreeKey& key, const GridConfig& cfg, const FieldSource& src) {
  const int n = cfg.n, gw = grid.ghost();
  const std::int64_t ncell = cfg.cells(key.level);
  const Resolver res(cfg, src);
  for (int i = -gw; i < n + gw; ++i)
    for (int j = -gw; j < n + gw; ++j)
      for (int k = -gw; k < n + gw; ++k) {
        if (grid.interior(i, j, k)) continue;
        const int loc[3] = {i, j, k};
        G3 g;
        bool flip[3] = {false, false, false};
        for (int d = 0; d < 3; ++d)
          g[d] = apply_bc(static_cast<std::int64_t>(key.idx[d]) * n + loc[d], ncell, cfg.boundary, flip[d]);
        State s = res.sample(key.level, g);
        for (int d = 0; d < 3; ++d)
          if (flip[d]) s[kSx + d] = -s[kSx + d];
        grid.set_state(i, j, k, s);
      }
}

void exchange_halos(Octree& tree) {
  const FieldSource src = tree_source(tree);
  for (auto& [k, nd] : tree.nodes()) {
    if (nd.leaf) fill_ghosts(nd.grid, k, tree.config(), src);
  }
}

std::vector<TreeKey> halo_dependencies(const Octree& tree, const TreeKey& key) {
  std::set<TreeKey> used;
  const FieldSource base = tree_source(tree);
  const FieldSource rec = [&](const TreeKey& k) {
    NodeRef r = base(k);
    if (r.exists && r.leaf && k != key) used.insert(k);
    return r;
  };
  SubGrid scratch = tree.make_grid(key);
  fill_ghosts(scratch, key, tree.config(), rec);
  return {used.begin(), used.end()};
}

void fill_block_boundary(SubGrid& grid, Boundary b) {
  const int gw = grid.ghost();
  for (int i = -gw; i < grid.n(0) + gw; ++i)
    for (int j = -gw; j < grid.n(1) + gw; ++j)
      for (int k = -gw; k < grid.n(2) + gw; ++k) {
        if (grid.interior(i, j, k)) continue;
        const int loc[3] = {i, j, k};
        int src[3];
        bool flip[3] = {false, false, false};
        for (int d = 0; d < 3; ++d) src[d] = static_cast<int>(apply_bc(loc[d], grid.n(d), b, flip[d]));
        State s = grid.state(src[0], src[1], src[2]);
        for (int d = 0; d < 3; ++d)
          if (flip[d]) s[kSx + d] = -s[kSx + d];
        grid.set_state(i, j, k, s);
      }
}

}  // namespace okt::grid
