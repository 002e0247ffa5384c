#include "okt/harness/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "okt/fmm/solver.hpp"
#include "okt/grid/halo.hpp"

namespace okt::harness {

using grid::GridConfig;
using grid::Octree;
using grid::State;
using grid::TreeKey;

namespace {

constexpr double kSedovAmbientP = 1e-5;
constexpr double kAtmosphere = 1e-3;  // star atmosphere density fraction
constexpr double kBlobPressure = 1e-4;
constexpr double kBlobBackground = 1e-3;

template <class F>
void fill_cells(Octree& t, F&& f) {
  const int n = t.config().n;
  for (auto& [k, nd] : t.nodes()) {
    if (!nd.leaf) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) nd.grid.set_state(i, j, l, f(nd.grid.center(i, j, l)));
  }
}

std::array<double, 3> center_of(const GridConfig& g) {
  return {g.origin[0] + 0.5 * g.length, g.origin[1] + 0.5 * g.length, g.origin[2] + 0.5 * g.length};
}

double box_distance2(const std::array<std::array<double, 3>, 2>& b, const std::array<double, 3>& p) {
  double d2 = 0;
  for (int d = 0; d < 3; ++d) {
    const double e = std::max({b[0][d] - p[d], 0.0, p[d] - b[1][d]});
    d2 += e * e;
  }
  return d2;
}

double eos_gamma(const Scenario& s, const RunConfig& c) { return c.gamma != 0 ? c.gamma : s.gamma; }

hydro::EosParams eos_of(const Octree&, const Scenario& s, const RunConfig& c) { return hydro_config(s, c).eos; }

const Scenario& self(const std::string& name) { return find_scenario(name); }

// --- sod

void init_sod(Octree& t, const RunConfig& c) {
  const auto eos = eos_of(t, self("sod"), c);
  const double x0 = center_of(t.config())[0];
  fill_cells(t, [&](const std::array<double, 3>& x) {
    const bool left = x[0] < x0;
    return make_state(left ? c.sod_rho_l : c.sod_rho_r, {0, 0, 0}, left ? c.sod_p_l : c.sod_p_r, eos,
                      left ? std::array<double, 5>{1, 0, 0, 0, 0} : std::array<double, 5>{0, 1, 0, 0, 0});
  });
}

bool refine_sod(const TreeKey& k, const GridConfig& g, const RunConfig&) {
  const auto b = node_box(g, k);
  const double x0 = center_of(g)[0];
  return b[0][0] <= x0 && x0 <= b[1][0];
}

// --- sedov

bool refine_sedov(const TreeKey& k, const GridConfig& g, const RunConfig&) {
  const double r = 0.15 * g.length;
  return box_distance2(node_box(g, k), center_of(g)) <= r * r;
}

void init_sedov(Octree& t, const RunConfig& c) {
  const auto eos = eos_of(t, self("sedov"), c);
  const State ambient = make_state(1.0, {0, 0, 0}, kSedovAmbientP, eos);
  const auto x0 = center_of(t.config());
  fill_cells(t, [&](const std::array<double, 3>&) { return ambient; });
  // finest cells touching the center share the deposit by volume
  const std::uint32_t top = t.max_level();
  double volume = 0;
  std::vector<std::pair<TreeKey, std::array<int, 3>>> hits;
  const int n = t.config().n;
  for (auto& [k, nd] : t.nodes()) {
    if (!nd.leaf || k.level != top) continue;
    const double h = nd.grid.h();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const auto x = nd.grid.center(i, j, l);
          if (std::fabs(x[0] - x0[0]) < h && std::fabs(x[1] - x0[1]) < h && std::fabs(x[2] - x0[2]) < h) {
            hits.push_back({k, {i, j, l}});
            volume += nd.grid.cell_volume();
          }
        }
  }
  for (const auto& [k, ijk] : hits) {
    auto& g = t.node(k).grid;
    State s = ambient;
    s[grid::kEgas] += c.e0 / volume;
    s[grid::kTau] = hydro::tau_from_internal(s[grid::kEgas], eos);
    g.set_state(ijk[0], ijk[1], ijk[2], s);
  }
}

// --- stars

double lane_emden(double r, double R) {
  if (r >= R) return 0.0;
  if (r == 0.0) return 1.0;
  const double xi = std::numbers::pi * r / R;
  return std::sin(xi) / xi;
}

bool refine_star(const TreeKey& k, const GridConfig& g, const RunConfig& c) {
  const double r = 1.2 * c.star_radius * g.length;
  return box_distance2(node_box(g, k), center_of(g)) <= r * r;
}

void init_star(Octree& t, const RunConfig& c, const Scenario& s, double speed, const std::array<double, 3>& dir) {
  auto eos = hydro_config(s, c).eos;
  const auto x0 = center_of(t.config());
  const double R = c.star_radius * t.config().length;
  auto rho_at = [&](const std::array<double, 3>& x) {
    const double r = std::sqrt((x[0] - x0[0]) * (x[0] - x0[0]) + (x[1] - x0[1]) * (x[1] - x0[1]) +
                               (x[2] - x0[2]) * (x[2] - x0[2]));
    return c.star_rho * std::max(lane_emden(r, R), kAtmosphere);
  };
  // density first; the pressure constant comes from the discrete balance
  fill_cells(t, [&](const std::array<double, 3>& x) {
    return make_state(rho_at(x), {0, 0, 0}, 1.0, eos);
  });
  const double K = star_pressure_constant(t, c);
  const std::array<double, 3> v{speed * dir[0], speed * dir[1], speed * dir[2]};
  fill_cells(t, [&](const std::array<double, 3>& x) {
    const double rho = rho_at(x);
    const bool inside = rho > c.star_rho * kAtmosphere;
    return make_state(rho, v, K * rho * rho, eos,
                      inside ? std::array<double, 5>{1, 0, 0, 0, 0} : std::array<double, 5>{0, 0, 1, 0, 0});
  });
}

// --- two blobs

std::array<std::array<double, 3>, 2> blob_centers(const GridConfig& g, const RunConfig& c) {
  auto x0 = center_of(g);
  auto a = x0, b = x0;
  a[0] -= 0.5 * c.blob_separation * g.length;
  b[0] += 0.5 * c.blob_separation * g.length;
  return {a, b};
}

bool refine_blobs(const TreeKey& k, const GridConfig& g, const RunConfig& c) {
  const double r = 3.0 * c.blob_sigma * g.length;
  const auto box = node_box(g, k);
  for (const auto& p : blob_centers(g, c))
    if (box_distance2(box, p) <= r * r) return true;
  return false;
}

void init_blobs(Octree& t, const RunConfig& c) {
  const auto eos = eos_of(t, self("two_body"), c);
  const auto centers = blob_centers(t.config(), c);
  const double sig = c.blob_sigma * t.config().length;
  const double peak = c.blob_mass / (std::pow(2.0 * std::numbers::pi, 1.5) * sig * sig * sig);
  fill_cells(t, [&](const std::array<double, 3>& x) {
    double part[2];
    for (int b = 0; b < 2; ++b) {
      double r2 = 0;
      for (int d = 0; d < 3; ++d) r2 += (x[d] - centers[b][d]) * (x[d] - centers[b][d]);
      part[b] = peak * std::exp(-0.5 * r2 / (sig * sig));
    }
    const double bg = kBlobBackground * peak;
    const double rho = bg + part[0] + part[1];
    return make_state(rho, {0, 0, 0}, kBlobPressure, eos, {part[0] / rho, part[1] / rho, bg / rho, 0, 0});
  });
}

// --- random density

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t key_seed(std::uint64_t seed, const TreeKey& k) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ k.level);
  for (int d = 0; d < 3; ++d) h = mix(h ^ k.idx[d]);
  return h;
}

bool refine_random(const TreeKey& k, const GridConfig&, const RunConfig& c) {
  if (k.level == 0) return true;
  const double u = static_cast<double>(key_seed(c.seed ^ 0x5eed, k) >> 11) * 0x1.0p-53;
  return u < c.refine_fraction;
}

void init_random(Octree& t, const RunConfig& c) {
  const auto eos = eos_of(t, self("random_density"), c);
  const int n = t.config().n;
  for (auto& [k, nd] : t.nodes()) {
    if (!nd.leaf) continue;
    std::mt19937_64 rng(key_seed(c.seed, k));
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) nd.grid.set_state(i, j, l, make_state(u(rng), {0, 0, 0}, 1.0, eos));
  }
}

std::vector<Scenario> make_library() {
  std::vector<Scenario> lib;
  {
    Scenario s;
    s.name = "sod";
    s.summary = "planar shock tube along x";
    s.gamma = 1.4;
    s.has_reference = true;
    s.refine = refine_sod;
    s.init = init_sod;
    lib.push_back(s);
  }
  {
    Scenario s;
    s.name = "sedov";
    s.summary = "point energy deposit at the domain center";
    s.gamma = 1.4;
    s.refine = refine_sedov;
    s.init = init_sedov;
    lib.push_back(s);
  }
  {
    Scenario s;
    s.name = "star_at_rest";
    s.summary = "self-gravitating polytrope in discrete hydrostatic balance";
    s.gravity = true;
    s.refine = refine_star;
    s.init = [](Octree& t, const RunConfig& c) { init_star(t, c, self("star_at_rest"), 0.0, {1, 0, 0}); };
    lib.push_back(s);
  }
  {
    Scenario s;
    s.name = "star_in_motion";
    s.summary = "the same star on a uniformly moving background";
    s.gravity = true;
    s.refine = refine_star;
    s.init = [](Octree& t, const RunConfig& c) {
      const double v = c.star_speed != 0 ? c.star_speed : 0.1;
      const double r = 1.0 / std::sqrt(3.0);
      init_star(t, c, self("star_in_motion"), v, {r, r, r});
    };
    lib.push_back(s);
  }
  {
    Scenario s;
    s.name = "two_body";
    s.summary = "two gaussian mass blobs on a cold background";
    s.gravity = true;
    s.refine = refine_blobs;
    s.init = init_blobs;
    lib.push_back(s);
  }
  {
    Scenario s;
    s.name = "random_density";
    s.summary = "seeded random positive density, gravity only";
    s.hydro = false;
    s.gravity = true;
    s.refine = refine_random;
    s.init = init_random;
    lib.push_back(s);
  }
  return lib;
}

}  // namespace

const std::vector<Scenario>& scenario_library() {
  static const std::vector<Scenario> lib = make_library();
  return lib;
}

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& s : scenario_library()) out.push_back(s.name);
  return out;
}

const Scenario& find_scenario(const std::string& name) {
  for (const auto& s : scenario_library())
    if (s.name == name) return s;
  std::string known;
  for (const auto& s : scenario_library()) known += (known.empty() ? "" : ", ") + s.name;
  throw UnknownScenario("unknown scenario '" + name + "' (known: " + known + ")");
}

GridConfig grid_config(const Scenario& s, const RunConfig& cfg) {
  GridConfig g;
  g.n = cfg.n;
  g.boundary = s.boundary;
  return g;
}

hydro::HydroConfig hydro_config(const Scenario& s, const RunConfig& cfg) {
  hydro::HydroConfig h;
  h.eos.gamma = eos_gamma(s, cfg);
  h.cfl = cfg.cfl;
  h.eos.validate();
  return h;
}

fmm::FmmConfig fmm_config(const RunConfig& cfg) {
  fmm::FmmConfig f;
  f.theta = cfg.theta;
  f.p = cfg.order;
  f.G = cfg.G;
  return f;
}

Octree build_scenario_tree(const Scenario& s, const RunConfig& cfg) {
  const GridConfig g = grid_config(s, cfg);
  Octree t = grid::build_tree(g, cfg.levels, [&](const TreeKey& k) { return s.refine(k, g, cfg); });
  s.init(t, cfg);
  t.restrict_all();
  return t;
}

State make_state(double rho, const std::array<double, 3>& v, double p, const hydro::EosParams& eos,
                 const std::array<double, grid::kNumFracs>& X) {
  hydro::Primitive w;
  w.rho = rho;
  w.v = v;
  w.p = p;
  for (int f = 0; f < grid::kNumFracs; ++f) w.X[f] = X[f];
  w.tau = hydro::tau_from_internal(p / (eos.gamma - 1.0), eos) / rho;
  return hydro::to_conserved(w, eos);
}

std::array<std::array<double, 3>, 2> node_box(const GridConfig& cfg, const TreeKey& k) {
  const double w = cfg.length / static_cast<double>(1u << k.level);
  std::array<std::array<double, 3>, 2> b;
  for (int d = 0; d < 3; ++d) {
    b[0][d] = cfg.origin[d] + k.idx[d] * w;
    b[1][d] = b[0][d] + w;
  }
  return b;
}

double sedov_deposited_energy(const Octree& tree, const RunConfig& cfg) {
  const auto eos = hydro_config(find_scenario("sedov"), cfg).eos;
  const double ambient = make_state(1.0, {0, 0, 0}, kSedovAmbientP, eos)[grid::kEgas];
  const int n = tree.config().n;
  double e = 0;
  for (const auto& [k, nd] : tree.nodes()) {
    if (!nd.leaf) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) e += (nd.grid.at(grid::kEgas, i, j, l) - ambient) * nd.grid.cell_volume();
  }
  return e;
}

double star_pressure_constant(Octree& tree, const RunConfig& cfg) {
  const fmm::FmmConfig fc = fmm_config(cfg);
  const fmm::GravityField gf = fmm::solve_gravity(tree, fc);
  grid::exchange_halos(tree);
  const int n = tree.config().n;
  const double floor = cfg.star_rho * kAtmosphere;
  double ab = 0, aa = 0;
  for (const auto& [k, nd] : tree.nodes()) {
    if (!nd.leaf) continue;
    const auto& g = nd.grid;
    const auto& gb = gf.leaves.at(k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const double rho = g.at(grid::kRho, i, j, l);
          if (rho <= floor) continue;
          const int idx[3] = {i, j, l};
          for (int d = 0; d < 3; ++d) {
            int lo[3] = {i, j, l}, hi[3] = {i, j, l};
            lo[d] = idx[d] - 1;
            hi[d] = idx[d] + 1;
            const double rl = g.at(grid::kRho, lo[0], lo[1], lo[2]), rh = g.at(grid::kRho, hi[0], hi[1], hi[2]);
            const double a = (rh * rh - rl * rl) / (2.0 * g.h());
            const double b = rho * gb[(i * n + j) * n + l].g[d];
            ab += a * b;
            aa += a * a;
          }
        }
  }
  if (!(aa > 0) || !(ab > 0)) {
    const double R = cfg.star_radius * tree.config().length;
    return 2.0 * cfg.G * R * R / std::numbers::pi;  // analytic n = 1 value
  }
  return ab / aa;
}

}  // namespace okt::harness
