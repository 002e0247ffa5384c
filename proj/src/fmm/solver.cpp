#include "okt/fmm/solver.hpp"

#include <cmath>
#include <memory>
#include <mutex>

namespace okt::fmm {

TaylorSet propagate_node(const MultipoleTree& mt, const TreeKey& key, TaylorSet own, const TaylorSet* parent) {
  if (!parent || key.level == 0) return own;
  const int n = mt.config().n;
  const MultipoleNode* self = mt.find(key);
  const MultipoleNode* pn = mt.find(key.parent());
  if (!self || !pn) throw std::out_of_range("propagate: missing moments near " + key.str());
  const TreeKey pk = key.parent();
  const int p = mt.order();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int local = (i * n + j) * n + k;
        const int pi = ((static_cast<int>(key.idx[0] - 2 * pk.idx[0]) * n + i) >> 1);
        const int pj = ((static_cast<int>(key.idx[1] - 2 * pk.idx[1]) * n + j) >> 1);
        const int pkk = ((static_cast<int>(key.idx[2] - 2 * pk.idx[2]) * n + k) >> 1);
        const int pl = (pi * n + pj) * n + pkk;
        shift_down((*parent)[pl], (*pn->mp)[pl].X, (*self->mp)[local].X, self->leaf, p, own[local]);
      }
  return own;
}

GravityBlock extract_field(const TaylorSet& t, double G) {
  GravityBlock out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out[i].phi = G * t[i].L[0];
    for (int d = 0; d < 3; ++d) out[i].g[d] = G * (-t[i].L[1 + d] + t[i].c[d]);
  }
  return out;
}

GravityField solve_gravity(const grid::Octree& tree, const FmmConfig& cfg, const Stencil& st) {
  cfg.validate();
  const MultipoleTree mt = compute_moments(tree, cfg.p);
  GravityField out;
  std::map<TreeKey, TaylorSet> down;
  // map order is (level, sfc): parents come before children
  for (const auto& [k, nd] : mt.nodes()) {
    TaylorSet own = node_interactions_all(mt, k, st, &out.counters);
    const TaylorSet* parent = nullptr;
    if (k.level > 0) parent = &down.at(k.parent());
    TaylorSet t = propagate_node(mt, k, std::move(own), parent);
    if (nd.leaf)
      out.leaves.emplace(k, extract_field(t, cfg.G));
    else
      down.emplace(k, std::move(t));
  }
  return out;
}

GravityField solve_gravity(const grid::Octree& tree, const FmmConfig& cfg) {
  return solve_gravity(tree, cfg, generate_stencil(cfg));
}

namespace {

using runtime::Future;
using runtime::Unit;
using MomentPtr = std::shared_ptr<const MultipoleSet>;

struct TaskSolve {
  const grid::Octree& tree;
  const FmmConfig& cfg;
  const Stencil& st;
  runtime::Scheduler& sched;
  MultipoleTree mt;
  std::mutex mutex;
  GravityField out;
  std::vector<InteractionCounters> counters;  // one per node, merged in key order
  std::map<TreeKey, std::size_t> index;

  TaskSolve(const grid::Octree& t, const FmmConfig& c, const Stencil& s, runtime::Scheduler& sc)
      : tree(t), cfg(c), st(s), sched(sc), mt(t.config(), c.p) {}

  Future<MomentPtr> moments(const TreeKey& k) {
    const grid::TreeNode& nd = tree.node(k);
    if (nd.leaf)
      return runtime::async(
          sched, [this, k]() -> MomentPtr { return std::make_shared<const MultipoleSet>(leaf_moments(tree.node(k).grid, k)); },
          "p2m " + k.str());
    std::vector<Future<MomentPtr>> ch;
    for (int c = 0; c < 8; ++c) ch.push_back(moments(k.child(c)));
    return runtime::when_all(std::move(ch), &sched).then([this, k](std::vector<MomentPtr> v) -> MomentPtr {
      std::array<const MultipoleSet*, 8> ptr;
      for (int c = 0; c < 8; ++c) ptr[c] = v[c].get();
      auto m = std::make_shared<const MultipoleSet>(combine_moments(k, ptr, tree.config(), cfg.p));
      std::lock_guard lk(mutex);
      for (int c = 0; c < 8; ++c) mt.set(k.child(c), tree.node(k.child(c)).leaf, v[c]);
      return m;
    });
  }

  Future<std::vector<Unit>> descend(const TreeKey& k, std::shared_ptr<const TaylorSet> parent) {
    return runtime::async(
               sched,
               [this, k, parent]() {
                 InteractionCounters* cnt = &counters[index.at(k)];
                 TaylorSet own = node_interactions_all(mt, k, st, cnt);
                 return std::make_shared<const TaylorSet>(propagate_node(mt, k, std::move(own), parent.get()));
               },
               "interact " + k.str())
        .then([this, k](std::shared_ptr<const TaylorSet> t) -> Future<std::vector<Unit>> {
          if (tree.node(k).leaf) {
            GravityBlock b = extract_field(*t, cfg.G);
            std::lock_guard lk(mutex);
            out.leaves.emplace(k, std::move(b));
            return runtime::make_ready_future(std::vector<Unit>{}, &sched);
          }
          std::vector<Future<Unit>> ch;
          for (int c = 0; c < 8; ++c)
            ch.push_back(descend(k.child(c), t).then([](std::vector<Unit>) { return Unit{}; }));
          return runtime::when_all(std::move(ch), &sched);
        });
  }

  GravityField run() {
    std::size_t i = 0;
    for (const auto& [k, nd] : tree.nodes()) index.emplace(k, i++);
    counters.assign(index.size(), {});
    const TreeKey root(0, {0, 0, 0});
    auto done = moments(root)
                    .then([this, root](MomentPtr m) {
                      {
                        std::lock_guard lk(mutex);
                        mt.set(root, tree.node(root).leaf, std::move(m));
                      }
                      return descend(root, nullptr);
                    });
    done.get();
    for (const auto& c : counters) out.counters.merge(c);
    return std::move(out);
  }
};

}  // namespace

GravityField solve_gravity_tasks(const grid::Octree& tree, const FmmConfig& cfg, const Stencil& st,
                                 runtime::Scheduler& sched) {
  cfg.validate();
  if (!tree.is_graded()) throw grid::GradednessError("fmm requires a graded tree");
  TaskSolve s(tree, cfg, st, sched);
  return s.run();
}

std::vector<PointMass> leaf_points(const grid::Octree& tree) {
  std::vector<PointMass> pts;
  for (const auto& [k, nd] : tree.nodes()) {
    if (!nd.leaf) continue;
    const auto m = leaf_moments(nd.grid, k);
    for (std::size_t l = 0; l < m.size(); ++l) pts.push_back({k, static_cast<int>(l), m[l].M[0], m[l].X});
  }
  return pts;
}

std::vector<GravityCell> direct_sum_oracle(const std::vector<PointMass>& pts, double G) {
  const std::size_t n = pts.size();
  std::vector<GravityCell> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double phi = 0.0, g[3] = {0, 0, 0};
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = pts[j].x[0] - pts[i].x[0], dy = pts[j].x[1] - pts[i].x[1], dz = pts[j].x[2] - pts[i].x[2];
      const double r2 = dx * dx + dy * dy + dz * dz;
      const double ir = 1.0 / std::sqrt(r2);
      const double mr3 = pts[j].m * ir * ir * ir;
      phi -= pts[j].m * ir;
      g[0] += mr3 * dx;
      g[1] += mr3 * dy;
      g[2] += mr3 * dz;
    }
    out[i].phi = G * phi;
    for (int d = 0; d < 3; ++d) out[i].g[d] = G * g[d];
  }
  return out;
}

std::vector<GravityCell> flatten(const GravityField& f, const std::vector<PointMass>& pts) {
  std::vector<GravityCell> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(f.leaves.at(p.key)[p.local]);
  return out;
}

double ConservationResiduals::force_rel() const {
  const double m = std::max({std::fabs(force[0]), std::fabs(force[1]), std::fabs(force[2])});
  return force_scale > 0 ? m / force_scale : m;
}

double ConservationResiduals::torque_rel() const {
  const double m = std::max({std::fabs(torque[0]), std::fabs(torque[1]), std::fabs(torque[2])});
  return torque_scale > 0 ? m / torque_scale : m;
}

ConservationResiduals conservation_residuals(const std::vector<PointMass>& pts, const std::vector<GravityCell>& g) {
  if (pts.size() != g.size()) throw std::invalid_argument("residuals: size mismatch");
  ConservationResiduals r;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& x = pts[i].x;
    const double m = pts[i].m;
    const double f[3] = {m * g[i].g[0], m * g[i].g[1], m * g[i].g[2]};
    for (int d = 0; d < 3; ++d) r.force[d] += f[d];
    r.torque[0] += x[1] * f[2] - x[2] * f[1];
    r.torque[1] += x[2] * f[0] - x[0] * f[2];
    r.torque[2] += x[0] * f[1] - x[1] * f[0];
    const double gn = std::sqrt(g[i].g[0] * g[i].g[0] + g[i].g[1] * g[i].g[1] + g[i].g[2] * g[i].g[2]);
    const double xn = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    r.force_scale += std::fabs(m) * gn;
    r.torque_scale += xn * std::fabs(m) * gn;
  }
  return r;
}

double linf_relative_error(const std::vector<GravityCell>& g, const std::vector<GravityCell>& ref) {
  if (g.size() != ref.size()) throw std::invalid_argument("error: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double d2 = 0.0, r2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      d2 += (g[i].g[d] - ref[i].g[d]) * (g[i].g[d] - ref[i].g[d]);
      r2 += ref[i].g[d] * ref[i].g[d];
    }
    num = std::max(num, std::sqrt(d2));
    den = std::max(den, std::sqrt(r2));
  }
  return den > 0 ? num / den : num;
}

}  // namespace okt::fmm
