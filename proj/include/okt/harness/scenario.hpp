#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "okt/fmm/config.hpp"
#include "okt/grid/octree.hpp"
#include "okt/harness/config.hpp"
#include "okt/hydro/advance.hpp"

namespace okt::harness {

struct UnknownScenario : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Scenario {
  std::string name;
  std::string summary;
  grid::Boundary boundary = grid::Boundary::Outflow;
  double gamma = 5.0 / 3.0;
  bool hydro = true;
  bool gravity = false;
  bool has_reference = false;  // exact solution available
  // Asked for nodes above the finest level.
  std::function<bool(const grid::TreeKey&, const grid::GridConfig&, const RunConfig&)> refine;
  // Fills every leaf; deterministic in the config (seed included).
  std::function<void(grid::Octree&, const RunConfig&)> init;
};

const std::vector<Scenario>& scenario_library();
std::vector<std::string> scenario_names();
const Scenario& find_scenario(const std::string& name);

grid::GridConfig grid_config(const Scenario& s, const RunConfig& cfg);
hydro::HydroConfig hydro_config(const Scenario& s, const RunConfig& cfg);
fmm::FmmConfig fmm_config(const RunConfig& cfg);

grid::Octree build_scenario_tree(const Scenario& s, const RunConfig& cfg);

// Conserved state from primitives with a consistent entropy tracer.
grid::State make_state(double rho, const std::array<double, 3>& v, double p, const hydro::EosParams& eos,
                       const std::array<double, grid::kNumFracs>& X = {1, 0, 0, 0, 0});

// Lower and upper corner of a node's region.
std::array<std::array<double, 3>, 2> node_box(const grid::GridConfig& cfg, const grid::TreeKey& k);

// Deposited energy of a sedov state: sum over leaves of (E - E_ambient) V.
double sedov_deposited_energy(const grid::Octree& tree, const RunConfig& cfg);

// K in P = K rho^2 minimizing the discrete hydrostatic residual over the
// star for the stored density.
double star_pressure_constant(grid::Octree& tree, const RunConfig& cfg);

}  // namespace okt::harness
