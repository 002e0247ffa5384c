#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "okt/fmm/solver.hpp"
#include "okt/grid/halo.hpp"
#include "okt/hydro/flux.hpp"
#include "okt/hydro/ppm.hpp"

namespace okt::hydro {

struct HydroConfig {
  EosParams eos;
  double cfl = 0.4;
};

struct CflViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical fluxes on every face of a block, per direction, indexed like
// FaceStates.
struct FluxSet {
  std::array<int, 3> dims{0, 0, 0};
  std::array<std::vector<State>, 3> F;
  std::size_t index(int dir, int f, int a, int b) const {
    const int na = dims[dir == 0 ? 1 : 0], nb = dims[dir == 2 ? 1 : 2];
    return (static_cast<std::size_t>(f) * na + a) * nb + b;
  }
  State& at(int dir, int f, int a, int b) { return F[dir][index(dir, f, a, b)]; }
  const State& at(int dir, int f, int a, int b) const { return F[dir][index(dir, f, a, b)]; }
};

// Needs filled ghosts. Errors name the cell; `where` labels the block.
FluxSet compute_fluxes(const grid::SubGrid& g, const EosParams& eos, const std::string& where = "block");

// Replaces each coarse leaf face flux adjacent to finer leaves by the mean
// of the four fine face fluxes, making coarse-fine exchanges conservative.
void reflux(const grid::Octree& tree, std::map<grid::TreeKey, FluxSet>& fluxes);

// One coarse block's share of reflux; `fine_flux` returns null for keys that
// are not leaves. Only the fine faces facing the block are read.
using FluxLookup = std::function<const FluxSet*(const grid::TreeKey&)>;
void reflux_block(const grid::Octree& tree, const grid::TreeKey& key, FluxSet& fx, const FluxLookup& fine_flux);

// cur <- w0 * u0 + (1 - w0) * (cur + dt * L(cur)), with L the flux divergence
// plus gravity sources (momentum rho g, energy s.g); then the dual-energy
// switch and floors on every interior cell. u0 may be null when w0 = 0.
void stage_update(grid::SubGrid& cur, const grid::SubGrid* u0, double w0, const FluxSet& fx,
                  const fmm::GravityBlock* gravity, double dt, const EosParams& eos, FloorCounts& floors);

// C * min over interior cells of h / (|v| + c_s).
double cfl_dt(const grid::SubGrid& g, const EosParams& eos, double C);
double cfl_dt(const grid::Octree& tree, const EosParams& eos, double C);

// Free-fall limit C * sqrt(h / max |g|); infinite for vanishing g.
double gravity_dt(const fmm::GravityBlock& g, double h, double C);
double gravity_dt(const grid::Octree& tree, const fmm::GravityField& g, double C);

using GravitySolve = std::function<fmm::GravityField(const grid::Octree&)>;

struct HydroStats {
  FloorCounts floors;
  std::uint64_t stages = 0;
  std::uint64_t leaf_updates = 0;  // one per leaf per step
};

// One SSP-RK2 step of every leaf. Gravity (if given) is recomputed from the
// state at the start of each stage.
void advance(grid::Octree& tree, double dt, const HydroConfig& cfg, const GravitySolve& gravity = {},
             HydroStats* stats = nullptr);

// Same scheme on a standalone block with its own boundary condition.
void advance_block(grid::SubGrid& g, double dt, const HydroConfig& cfg, grid::Boundary bc,
                   HydroStats* stats = nullptr);

}  // namespace okt::hydro
