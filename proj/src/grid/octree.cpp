#include "okt/grid/octree.hpp"

#include <algorithm>
#include <set>

#include "okt/grid/refine.hpp"

namespace okt::grid {

const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::Outflow:
      return "outflow";
    case Boundary::Periodic:
      return "periodic";
    case Boundary::Reflecting:
      return "reflecting";
  }
  return "?";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "outflow") return Boundary::Outflow;
  if (s == "periodic") return Boundary::Periodic;
  if (s == "reflecting") return Boundary::Reflecting;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

Octree::Octree(GridConfig cfg) : cfg_(cfg) {
  if (cfg_.n < 2 || cfg_.ghost < 0 || !(cfg_.length > 0)) throw std::invalid_argument("bad grid configuration");
  TreeNode root;
  root.key = TreeKey{};
  root.grid = make_grid(root.key);
  nodes_.emplace(root.key, std::move(root));
}

TreeNode& Octree::node(const TreeKey& k) {
  auto it = nodes_.find(k);
  if (it == nodes_.end()) throw std::out_of_range("no node " + k.str());
  return it->second;
}

const TreeNode& Octree::node(const TreeKey& k) const {
  auto it = nodes_.find(k);
  if (it == nodes_.end()) throw std::out_of_range("no node " + k.str());
  return it->second;
}

TreeNode* Octree::find(const TreeKey& k) {
  auto it = nodes_.find(k);
  return it == nodes_.end() ? nullptr : &it->second;
}

const TreeNode* Octree::find(const TreeKey& k) const {
  auto it = nodes_.find(k);
  return it == nodes_.end() ? nullptr : &it->second;
}

std::array<double, 3> Octree::node_origin(const TreeKey& k) const {
  const double h = cfg_.h(k.level);
  std::array<double, 3> o;
  for (int d = 0; d < 3; ++d) o[d] = cfg_.origin[d] + (static_cast<double>(k.idx[d]) * cfg_.n + 0.5) * h;
  return o;
}

SubGrid Octree::make_grid(const TreeKey& k) const {
  return SubGrid::cube(cfg_.n, cfg_.ghost, cfg_.h(k.level), node_origin(k), static_cast<int>(k.level));
}

void Octree::refine(const TreeKey& k) {
  auto& nd = node(k);
  if (!nd.leaf) return;
  if (k.level >= kMaxLevel) throw std::out_of_range("cannot refine beyond maximum level");
  nd.leaf = false;
  for (int c = 0; c < 8; ++c) {
    TreeNode ch;
    ch.key = k.child(c);
    ch.locality = nd.locality;
    ch.grid = make_grid(ch.key);
    nodes_.emplace(ch.key, std::move(ch));
  }
}

std::optional<TreeKey> Octree::neighbor_key(const TreeKey& k, int dx, int dy, int dz) const {
  const std::int64_t ext = k.extent();
  const int off[3] = {dx, dy, dz};
  Index3 idx;
  for (int d = 0; d < 3; ++d) {
    std::int64_t v = static_cast<std::int64_t>(k.idx[d]) + off[d];
    if (v < 0 || v >= ext) {
      if (cfg_.boundary != Boundary::Periodic) return std::nullopt;
      v = ((v % ext) + ext) % ext;
    }
    idx[d] = static_cast<std::uint32_t>(v);
  }
  return TreeKey(k.level, idx);
}

std::vector<TreeKey> Octree::neighbor_keys(const TreeKey& k) const {
  std::vector<TreeKey> out;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dz = -1; dz <= 1; ++dz) {
        if (!dx && !dy && !dz) continue;
        auto nk = neighbor_key(k, dx, dy, dz);
        if (nk && *nk != k && contains(*nk) &&
            std::find(out.begin(), out.end(), *nk) == out.end())
          out.push_back(*nk);
      }
  return out;
}

std::vector<TreeKey> Octree::gradedness_violations() const {
  std::set<TreeKey> out;
  for (const auto& [k, nd] : nodes_) {
    if (k.level < 2) continue;
    const TreeKey p = k.parent();
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto nk = neighbor_key(p, dx, dy, dz);
          if (!nk || contains(*nk)) continue;
          TreeKey a = *nk;
          while (!contains(a)) a = a.parent();
          out.insert(a);
        }
  }
  return {out.begin(), out.end()};
}

std::size_t Octree::enforce_gradedness() {
  std::size_t extra = 0;
  for (auto v = gradedness_violations(); !v.empty(); v = gradedness_violations()) {
    for (const auto& k : v) refine(k);
    extra += v.size();
  }
  return extra;
}

bool Octree::is_graded() const { return gradedness_violations().empty(); }

std::vector<TreeKey> Octree::leaves() const {
  std::vector<TreeKey> out;
  for (const auto& [k, nd] : nodes_)
    if (nd.leaf) out.push_back(k);
  return out;
}

std::vector<TreeKey> Octree::level_keys(std::uint32_t level) const {
  std::vector<TreeKey> out;
  for (const auto& [k, nd] : nodes_)
    if (k.level == level) out.push_back(k);
  return out;
}

std::size_t Octree::leaf_count() const {
  std::size_t c = 0;
  for (const auto& [k, nd] : nodes_) c += nd.leaf ? 1 : 0;
  return c;
}

std::uint32_t Octree::max_level() const { return nodes_.rbegin()->first.level; }

std::vector<std::size_t> Octree::level_node_counts() const {
  std::vector<std::size_t> c(level_count(), 0);
  for (const auto& [k, nd] : nodes_) ++c[k.level];
  return c;
}

std::vector<std::size_t> Octree::level_leaf_counts() const {
  std::vector<std::size_t> c(level_count(), 0);
  for (const auto& [k, nd] : nodes_)
    if (nd.leaf) ++c[k.level];
  return c;
}

void Octree::restrict_all() {
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    auto& nd = it->second;
    if (nd.leaf) continue;
    const SubGrid* ch[8];
    for (int c = 0; c < 8; ++c) ch[c] = &node(nd.key.child(c)).grid;
    restrict_into(nd.grid, ch);
  }
}

State Octree::leaf_totals() const {
  State t{};
  for (const auto& [k, nd] : nodes_) {
    if (!nd.leaf) continue;
    const State s = nd.grid.totals();
    for (int f = 0; f < kNumFields; ++f) t[f] += s[f];
  }
  return t;
}

Octree build_tree(const GridConfig& cfg, int levels, const RefinePredicate& refine) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  Octree tree(cfg);
  for (int l = 0; l + 1 < levels; ++l) {
    for (const auto& k : tree.level_keys(static_cast<std::uint32_t>(l))) {
      if (refine && refine(k)) tree.refine(k);
    }
  }
  tree.enforce_gradedness();
  return tree;
}

Octree build_uniform_tree(const GridConfig& cfg, int levels) {
  return build_tree(cfg, levels, [](const TreeKey&) { return true; });
}

std::vector<std::size_t> partition(Octree& tree, int localities) {
  if (localities < 1) throw std::invalid_argument("need at least one locality");
  const auto leaves = tree.leaves();
  const std::size_t L = static_cast<std::size_t>(localities);
  const std::size_t base = leaves.size() / L, rem = leaves.size() % L;
  std::vector<std::size_t> counts(L, 0);
  std::size_t pos = 0;
  for (std::size_t loc = 0; loc < L; ++loc) {
    const std::size_t sz = base + (loc < rem ? 1 : 0);
    for (std::size_t i = 0; i < sz; ++i) tree.node(leaves[pos++]).locality = static_cast<int>(loc);
    counts[loc] = sz;
  }
  auto& nodes = tree.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    if (!it->second.leaf) it->second.locality = tree.node(it->first.child(0)).locality;
  }
  return counts;
}

}  // namespace okt::grid
