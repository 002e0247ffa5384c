#include "okt/hydro/advance.hpp"

#include <algorithm>
#include <cmath>

namespace okt::hydro {

using namespace grid;

FluxSet compute_fluxes(const SubGrid& g, const EosParams& eos, const std::string& where) {
  FluxSet fx;
  fx.dims = g.dims();
  for (int dir = 0; dir < 3; ++dir) {
    const FaceStates fs = ppm_reconstruct(g, dir, eos);
    const int a_ax = dir == 0 ? 1 : 0, b_ax = dir == 2 ? 1 : 2;
    const int nd = g.n(dir), na = g.n(a_ax), nb = g.n(b_ax);
    auto& F = fx.F[dir];
    F.resize(static_cast<std::size_t>(nd + 1) * na * nb);
    for (int f = 0; f <= nd; ++f)
      for (int a = 0; a < na; ++a)
        for (int b = 0; b < nb; ++b) {
          const std::size_t i = fx.index(dir, f, a, b);
          try {
            F[i] = central_flux(fs.left[i], fs.right[i], dir, eos);
          } catch (const NonPositivePressure& e) {
            int c[3];
            c[dir] = f;
            c[a_ax] = a;
            c[b_ax] = b;
            throw NonPositivePressure(where + " cell (" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
                                      std::to_string(c[2]) + ") face " + std::to_string(dir) + ": " + e.what());
          }
        }
  }
  return fx;
}

void reflux_block(const Octree& tree, const TreeKey& k, FluxSet& fx, const FluxLookup& fine_flux) {
  const int n = tree.config().n;
  for (int dir = 0; dir < 3; ++dir) {
    const int a_ax = dir == 0 ? 1 : 0, b_ax = dir == 2 ? 1 : 2;
    for (int side : {-1, 1}) {
      int off[3] = {0, 0, 0};
      off[dir] = side;
      const auto nk = tree.neighbor_key(k, off[0], off[1], off[2]);
      if (!nk) continue;
      const TreeNode* nb = tree.find(*nk);
      if (!nb || nb->leaf) continue;
      const int cf = side > 0 ? n : 0;      // coarse face
      const int ff = side > 0 ? 0 : n;      // fine face
      const int dbit = side > 0 ? 0 : 1;    // child offset along dir
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const int fa = 2 * a, fb = 2 * b;
          int child = dbit << dir;
          child |= (fa / n) << a_ax;
          child |= (fb / n) << b_ax;
          const TreeKey ck = nk->child(child);
          const FluxSet* finep = fine_flux(ck);
          if (!finep) throw GradednessError("reflux: fine neighbor " + ck.str() + " is not a leaf");
          const FluxSet& fine = *finep;
          const int la = fa % n, lb = fb % n;
          const State& f00 = fine.at(dir, ff, la, lb);
          const State& f01 = fine.at(dir, ff, la, lb + 1);
          const State& f10 = fine.at(dir, ff, la + 1, lb);
          const State& f11 = fine.at(dir, ff, la + 1, lb + 1);
          State& c = fx.at(dir, cf, a, b);
          for (int q = 0; q < kNumFields; ++q) c[q] = 0.25 * ((f00[q] + f01[q]) + (f10[q] + f11[q]));
        }
    }
  }
}

void reflux(const Octree& tree, std::map<TreeKey, FluxSet>& fluxes) {
  const FluxLookup lookup = [&](const TreeKey& k) -> const FluxSet* {
    auto it = fluxes.find(k);
    return it == fluxes.end() ? nullptr : &it->second;
  };
  for (auto& [k, fx] : fluxes) reflux_block(tree, k, fx, lookup);
}

void stage_update(SubGrid& cur, const SubGrid* u0, double w0, const FluxSet& fx, const fmm::GravityBlock* gravity,
                  double dt, const EosParams& eos, FloorCounts& floors) {
  const int nx = cur.n(0), ny = cur.n(1), nz = cur.n(2);
  const double k = dt / cur.h();
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int l = 0; l < nz; ++l) {
        State u = cur.state(i, j, l);
        const State& fxm = fx.at(0, i, j, l);
        const State& fxp = fx.at(0, i + 1, j, l);
        const State& fym = fx.at(1, j, i, l);
        const State& fyp = fx.at(1, j + 1, i, l);
        const State& fzm = fx.at(2, l, i, j);
        const State& fzp = fx.at(2, l + 1, i, j);
        State nu;
        for (int q = 0; q < kNumFields; ++q)
          nu[q] = u[q] - k * (((fxp[q] - fxm[q]) + (fyp[q] - fym[q])) + (fzp[q] - fzm[q]));
        if (gravity) {
          const auto& g = (*gravity)[static_cast<std::size_t>((i * ny + j) * nz + l)].g;
          for (int d = 0; d < 3; ++d) nu[kSx + d] += dt * u[kRho] * g[d];
          nu[kEgas] += dt * (u[kSx] * g[0] + u[kSy] * g[1] + u[kSz] * g[2]);
        }
        if (w0 != 0.0) {
          const State o = u0->state(i, j, l);
          for (int q = 0; q < kNumFields; ++q) nu[q] = w0 * o[q] + (1.0 - w0) * nu[q];
        }
        apply_floors(nu, eos, floors);
        select_dual_energy(nu, eos);
        cur.set_state(i, j, l, nu);
      }
}

double cfl_dt(const SubGrid& g, const EosParams& eos, double C) {
  double best = INFINITY;
  for (int i = 0; i < g.n(0); ++i)
    for (int j = 0; j < g.n(1); ++j)
      for (int l = 0; l < g.n(2); ++l) {
        const Primitive w = to_primitive(g.state(i, j, l), eos);
        const double p = std::max(w.p, eos.p_floor), rho = std::max(w.rho, eos.rho_floor);
        const double s = std::sqrt(w.v[0] * w.v[0] + w.v[1] * w.v[1] + w.v[2] * w.v[2]) + sound_speed(rho, p, eos);
        best = std::min(best, g.h() / s);
      }
  return C * best;
}

double cfl_dt(const Octree& tree, const EosParams& eos, double C) {
  double best = INFINITY;
  for (const auto& [k, nd] : tree.nodes())
    if (nd.leaf) best = std::min(best, cfl_dt(nd.grid, eos, C));
  return best;
}

double gravity_dt(const fmm::GravityBlock& g, double h, double C) {
  double gmax = 0;
  for (const auto& c : g) gmax = std::max(gmax, std::sqrt(c.g[0] * c.g[0] + c.g[1] * c.g[1] + c.g[2] * c.g[2]));
  return gmax > 0 ? C * std::sqrt(h / gmax) : INFINITY;
}

double gravity_dt(const Octree& tree, const fmm::GravityField& g, double C) {
  double best = INFINITY;
  for (const auto& [k, b] : g.leaves) best = std::min(best, gravity_dt(b, tree.node(k).grid.h(), C));
  return best;
}

namespace {

void check_dt(double dt, double limit) {
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
    throw CflViolation("dt " + std::to_string(dt) + " exceeds the CFL bound " + std::to_string(limit));
}

}  // namespace

void advance(Octree& tree, double dt, const HydroConfig& cfg, const GravitySolve& gravity, HydroStats* stats) {
  check_dt(dt, cfl_dt(tree, cfg.eos, cfg.cfl));
  HydroStats local;
  std::map<TreeKey, SubGrid> u0;
  for (const auto& [k, nd] : tree.nodes())
    if (nd.leaf) u0.emplace(k, nd.grid);
  for (int stage = 0; stage < 2; ++stage) {
    exchange_halos(tree);
    std::map<TreeKey, FluxSet> fluxes;
    for (const auto& [k, g] : u0) fluxes.emplace(k, compute_fluxes(tree.node(k).grid, cfg.eos, k.str()));
    reflux(tree, fluxes);
    fmm::GravityField gf;
    if (gravity) gf = gravity(tree);
    for (auto& [k, g0] : u0) {
      const fmm::GravityBlock* gb = gravity ? &gf.leaves.at(k) : nullptr;
      stage_update(tree.node(k).grid, &g0, stage == 0 ? 0.0 : 0.5, fluxes.at(k), gb, dt, cfg.eos, local.floors);
    }
    ++local.stages;
  }
  local.leaf_updates = u0.size();
  if (stats) {
    stats->floors.merge(local.floors);
    stats->stages += local.stages;
    stats->leaf_updates += local.leaf_updates;
  }
}

void advance_block(SubGrid& g, double dt, const HydroConfig& cfg, Boundary bc, HydroStats* stats) {
  check_dt(dt, cfl_dt(g, cfg.eos, cfg.cfl));
  HydroStats local;
  const SubGrid g0 = g;
  for (int stage = 0; stage < 2; ++stage) {
    fill_block_boundary(g, bc);
    const FluxSet fx = compute_fluxes(g, cfg.eos);
    stage_update(g, &g0, stage == 0 ? 0.0 : 0.5, fx, nullptr, dt, cfg.eos, local.floors);
    ++local.stages;
  }
  local.leaf_updates = 1;
  if (stats) {
    stats->floors.merge(local.floors);
    stats->stages += local.stages;
    stats->leaf_updates += local.leaf_updates;
  }
}

}  // namespace okt::hydro
