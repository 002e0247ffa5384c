#include "okt/fmm/interactions.hpp"

#include <algorithm>
#include <cmath>

namespace okt::fmm {

namespace {

using G3 = std::array<std::int64_t, 3>;

bool lex_less(const G3& a, const G3& b) { return a < b; }

class Engine {
 public:
  Engine(const MultipoleTree& mt, const TreeKey& key, const Stencil& st, KernelClass cls, const PairObserver* obs)
      : mt_(mt), st_(st), cls_(cls), obs_(obs), key_(key), p_(mt.order()), n_(mt.config().n) {
    self_ = mt.find(key);
    if (!self_) throw std::out_of_range("no multipoles for " + key.str());
    self_leaf_ = self_->leaf;
    level_ = key.level;
    ncell_ = static_cast<std::int64_t>(n_) << level_;
    reach_ = std::max(1, (st.max_offset + n_ - 1) / n_);
    const int w = 2 * reach_ + 1;
    table_.assign(static_cast<std::size_t>(w) * w * w, nullptr);
    const std::int64_t ext = std::int64_t{1} << level_;
    for (int dx = -reach_; dx <= reach_; ++dx)
      for (int dy = -reach_; dy <= reach_; ++dy)
        for (int dz = -reach_; dz <= reach_; ++dz) {
          const std::int64_t q[3] = {key.idx[0] + dx, key.idx[1] + dy, key.idx[2] + dz};
          if (q[0] < 0 || q[1] < 0 || q[2] < 0 || q[0] >= ext || q[1] >= ext || q[2] >= ext) continue;
          table_[slot(dx, dy, dz)] =
              mt.find(TreeKey(level_, {static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                                       static_cast<std::uint32_t>(q[2])}));
        }
    out_.assign(static_cast<std::size_t>(n_) * n_ * n_, CellTaylor{});
    if (!self_leaf_ || cls_ == KernelClass::MonopoleMonopole) collect_mirror_candidates();
  }

  TaylorSet run(InteractionCounters* counters) {
    const bool wanted = cls_ == node_kernel_classes(self_leaf_)[0] || cls_ == node_kernel_classes(self_leaf_)[1];
    if (wanted) {
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          for (int k = 0; k < n_; ++k) {
            const int local = (i * n_ + j) * n_ + k;
            const G3 g{static_cast<std::int64_t>(key_.idx[0]) * n_ + i, static_cast<std::int64_t>(key_.idx[1]) * n_ + j,
                       static_cast<std::int64_t>(key_.idx[2]) * n_ + k};
            CellTaylor& acc = out_[local];
            local_ = local;
            const CellMultipole& a = (*self_->mp)[local];
            same_level(g, a, acc);
            if (level_ > 0 && !mirror_.empty()) mirror(g, a, acc);
          }
    }
    if (counters) {
      counters->pairs[static_cast<int>(cls_)] += pairs_;
      counters->launches[static_cast<int>(cls_)] += 1;
    }
    return std::move(out_);
  }

 private:
  struct MirrorLevel {
    std::uint32_t level;
    std::vector<TreeKey> leaves;
  };

  int slot(int dx, int dy, int dz) const {
    const int w = 2 * reach_ + 1;
    return ((dx + reach_) * w + (dy + reach_)) * w + (dz + reach_);
  }

  static int local_of(const TreeKey& nk, const G3& g, int n) {
    return static_cast<int>(((g[0] - static_cast<std::int64_t>(nk.idx[0]) * n) * n +
                             (g[1] - static_cast<std::int64_t>(nk.idx[1]) * n)) *
                                n +
                            (g[2] - static_cast<std::int64_t>(nk.idx[2]) * n));
  }

  bool in_domain(const G3& g, std::int64_t ncell) const {
    return g[0] >= 0 && g[1] >= 0 && g[2] >= 0 && g[0] < ncell && g[1] < ncell && g[2] < ncell;
  }

  // Same-level node holding global cell g, or null.
  const MultipoleNode* same_level_node(const G3& g, TreeKey& nk) const {
    const std::int64_t q[3] = {g[0] / n_, g[1] / n_, g[2] / n_};
    const int dx = static_cast<int>(q[0] - key_.idx[0]), dy = static_cast<int>(q[1] - key_.idx[1]),
              dz = static_cast<int>(q[2] - key_.idx[2]);
    nk = TreeKey(level_, {static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                          static_cast<std::uint32_t>(q[2])});
    if (std::abs(dx) > reach_ || std::abs(dy) > reach_ || std::abs(dz) > reach_) return mt_.find(nk);
    return table_[slot(dx, dy, dz)];
  }

  void same_level(const G3& ga, const CellMultipole& a, CellTaylor& acc) {
    if (level_ == 0) {
      for (int x = 0; x < n_; ++x)
        for (int y = 0; y < n_; ++y)
          for (int z = 0; z < n_; ++z) {
            const G3 gb{x, y, z};
            if (gb == ga) continue;
            const Offset d{static_cast<int>(x - ga[0]), static_cast<int>(y - ga[1]), static_cast<int>(z - ga[2])};
            dispatch(ga, a, gb, self_, key_, !st_.far(d), acc);
          }
      return;
    }
    const int parity = static_cast<int>((ga[0] & 1) | ((ga[1] & 1) << 1) | ((ga[2] & 1) << 2));
    for (const auto& e : st_.offsets) {
      if (!(e.parity_mask >> parity & 1)) continue;
      const G3 gb{ga[0] + e.d[0], ga[1] + e.d[1], ga[2] + e.d[2]};
      if (!in_domain(gb, ncell_)) continue;
      TreeKey nk;
      const MultipoleNode* nb = same_level_node(gb, nk);
      if (!nb) continue;
      dispatch(ga, a, gb, nb, nk, e.near, acc);
    }
  }

  void dispatch(const G3& ga, const CellMultipole& a, const G3& gb, const MultipoleNode* nb, const TreeKey& nk,
                bool near, CellTaylor& acc) {
    const bool bl = nb->leaf;
    if (!near || (self_leaf_ && bl)) {
      if (classify(self_leaf_, bl) != cls_) return;
      const CellMultipole& b = (*nb->mp)[local_of(nk, gb, n_)];
      const bool a_lo = lex_less(ga, gb);
      const CellMultipole& lo = a_lo ? a : b;
      const CellMultipole& hi = a_lo ? b : a;
      const Side side = a_lo ? Side::Lo : Side::Hi;
      if (self_leaf_ && bl)
        point_kernel(lo, hi, side, acc);
      else
        pair_kernel(lo, hi, side, !self_leaf_, p_, acc);
      record(nk, local_of(nk, gb, n_));
    } else if (self_leaf_ && !bl) {
      descend(ga, a, gb, level_, acc);
    }
  }

  // Own leaf cell a (level_) against the children of refined cell gb at level lb.
  void descend(const G3& ga, const CellMultipole& a, const G3& gb, std::uint32_t lb, CellTaylor& acc) {
    const std::uint32_t lc = lb + 1;
    for (int o = 0; o < 8; ++o) {
      const G3 gc{2 * gb[0] + (o & 1), 2 * gb[1] + ((o >> 1) & 1), 2 * gb[2] + ((o >> 2) & 1)};
      const TreeKey ck(lc, {static_cast<std::uint32_t>(gc[0] / n_), static_cast<std::uint32_t>(gc[1] / n_),
                            static_cast<std::uint32_t>(gc[2] / n_)});
      const MultipoleNode* nc = mt_.find(ck);
      if (!nc) throw grid::GradednessError("refined node missing child " + ck.str());
      if (nc->leaf || separated(level_, ga, lc, gc, st_.radius2)) {
        if (classify(true, nc->leaf) != cls_) continue;
        const CellMultipole& b = (*nc->mp)[local_of(ck, gc, n_)];
        if (nc->leaf)
          point_kernel(a, b, Side::Lo, acc);
        else
          pair_kernel(a, b, Side::Lo, false, p_, acc);
        record(ck, local_of(ck, gc, n_));
      } else {
        descend(ga, a, gc, lc, acc);
      }
    }
  }

  void collect_mirror_candidates() {
    if (level_ == 0) return;
    int near_max = 0;
    for (const auto& d : st_.near) near_max = std::max({near_max, std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
    const int r = std::max(1, (near_max + n_ - 1) / n_);
    TreeKey anc = key_;
    for (std::uint32_t j = level_; j-- > 0;) {
      anc = anc.parent();
      MirrorLevel ml{j, {}};
      const std::int64_t ext = std::int64_t{1} << j;
      for (int dx = -r; dx <= r; ++dx)
        for (int dy = -r; dy <= r; ++dy)
          for (int dz = -r; dz <= r; ++dz) {
            const std::int64_t q[3] = {anc.idx[0] + dx, anc.idx[1] + dy, anc.idx[2] + dz};
            if (q[0] < 0 || q[1] < 0 || q[2] < 0 || q[0] >= ext || q[1] >= ext || q[2] >= ext) continue;
            const TreeKey qk(j, {static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                                 static_cast<std::uint32_t>(q[2])});
            const MultipoleNode* nq = mt_.find(qk);
            if (nq && nq->leaf) ml.leaves.push_back(qk);
          }
      std::sort(ml.leaves.begin(), ml.leaves.end());
      if (!ml.leaves.empty()) mirror_.push_back(std::move(ml));
    }
    std::reverse(mirror_.begin(), mirror_.end());  // coarsest level first
  }

  // Coarse leaf cells x whose descent into this cell's ancestors ends here.
  void mirror(const G3& gb, const CellMultipole& b, CellTaylor& acc) {
    const KernelClass want = classify(self_leaf_, true);
    if (want != cls_) return;
    for (const auto& ml : mirror_) {
      const std::uint32_t j = ml.level;
      const int shift = static_cast<int>(level_ - j);
      const G3 anc{gb[0] >> shift, gb[1] >> shift, gb[2] >> shift};
      const std::int64_t ncell_j = static_cast<std::int64_t>(n_) << j;
      for (const auto& qk : ml.leaves) {
        // distance from anc to the node box, in level-j cells
        std::int64_t dist2 = 0;
        for (int d = 0; d < 3; ++d) {
          const std::int64_t lo = static_cast<std::int64_t>(qk.idx[d]) * n_, hi = lo + n_ - 1;
          const std::int64_t t = anc[d] < lo ? lo - anc[d] : (anc[d] > hi ? anc[d] - hi : 0);
          dist2 += t * t;
        }
        if (static_cast<double>(dist2) >= st_.radius2) continue;
        const MultipoleNode* nq = mt_.find(qk);
        for (const auto& d : st_.near) {
          const G3 gx{anc[0] + d[0], anc[1] + d[1], anc[2] + d[2]};
          if (!in_domain(gx, ncell_j)) continue;
          if (gx[0] / n_ != qk.idx[0] || gx[1] / n_ != qk.idx[1] || gx[2] / n_ != qk.idx[2]) continue;
          if (j > 0) {
            const Offset pd{static_cast<int>((gx[0] >> 1) - (anc[0] >> 1)), static_cast<int>((gx[1] >> 1) - (anc[1] >> 1)),
                            static_cast<int>((gx[2] >> 1) - (anc[2] >> 1))};
            if (!st_.parents_near(pd)) continue;
          }
          bool reaches = true;
          for (std::uint32_t m = j + 1; m < level_ && reaches; ++m) {
            const int s = static_cast<int>(level_ - m);
            if (separated(j, gx, m, {gb[0] >> s, gb[1] >> s, gb[2] >> s}, st_.radius2)) reaches = false;
          }
          if (!reaches) continue;
          if (!self_leaf_ && !separated(j, gx, level_, gb, st_.radius2)) continue;
          const int xl = local_of(qk, gx, n_);
          const CellMultipole& x = (*nq->mp)[xl];
          if (self_leaf_)
            point_kernel(x, b, Side::Hi, acc);
          else
            pair_kernel(x, b, Side::Hi, true, p_, acc);
          record(qk, xl);
        }
      }
    }
  }

  void record(const TreeKey& pk, int pl) {
    ++pairs_;
    if (obs_) (*obs_)(local_, pk, pl);
  }

  const MultipoleTree& mt_;
  const Stencil& st_;
  KernelClass cls_;
  const PairObserver* obs_;
  int local_ = 0;
  TreeKey key_;
  int p_;
  int n_;
  const MultipoleNode* self_ = nullptr;
  bool self_leaf_ = true;
  std::uint32_t level_ = 0;
  std::int64_t ncell_ = 0;
  int reach_ = 1;
  std::vector<const MultipoleNode*> table_;
  std::vector<MirrorLevel> mirror_;
  TaylorSet out_;
  std::uint64_t pairs_ = 0;
};

}  // namespace

const char* kernel_class_name(KernelClass c) {
  switch (c) {
    case KernelClass::MultipoleMultipole:
      return "multipole_multipole";
    case KernelClass::MultipoleMonopole:
      return "multipole_monopole";
    case KernelClass::MonopoleMultipole:
      return "monopole_multipole";
    case KernelClass::MonopoleMonopole:
      return "monopole_monopole";
  }
  return "?";
}

bool separated(std::uint32_t la, const std::array<std::int64_t, 3>& ga, std::uint32_t lb,
               const std::array<std::int64_t, 3>& gb, double radius2) {
  const double s = std::ldexp(1.0, static_cast<int>(lb - la));
  double d2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double t = (static_cast<double>(ga[d]) + 0.5) * s - (static_cast<double>(gb[d]) + 0.5);
    d2 += t * t;
  }
  return d2 >= radius2;
}

TaylorSet node_interactions(const MultipoleTree& mt, const TreeKey& key, const Stencil& st, KernelClass cls,
                            InteractionCounters* counters, const PairObserver* observer) {
  Engine e(mt, key, st, cls, observer);
  return e.run(counters);
}

TaylorSet node_interactions_all(const MultipoleTree& mt, const TreeKey& key, const Stencil& st,
                                InteractionCounters* counters, const PairObserver* observer) {
  const MultipoleNode* nd = mt.find(key);
  if (!nd) throw std::out_of_range("no multipoles for " + key.str());
  const auto classes = node_kernel_classes(nd->leaf);
  TaylorSet a = node_interactions(mt, key, st, std::min(classes[0], classes[1]), counters, observer);
  accumulate(a, node_interactions(mt, key, st, std::max(classes[0], classes[1]), counters, observer));
  return a;
}

void accumulate(TaylorSet& into, const TaylorSet& add) {
  if (into.size() != add.size()) throw std::invalid_argument("taylor set size mismatch");
  for (std::size_t i = 0; i < into.size(); ++i) {
    for (int k = 0; k < kMaxCoeffs; ++k) into[i].L[k] += add[i].L[k];
    for (int d = 0; d < 3; ++d) {
      into[i].omega[d] += add[i].omega[d];
      into[i].c[d] += add[i].c[d];
    }
  }
}

}  // namespace okt::fmm
