#include "okt/harness/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "okt/harness/scenario.hpp"
#include "okt/hydro/riemann.hpp"

namespace okt::harness {

using grid::Octree;
using grid::State;
using grid::TreeKey;

const FieldNorm& ReferenceReport::norm(const std::string& field) const {
  for (const auto& n : norms)
    if (n.field == field) return n;
  throw std::out_of_range("no norm for field " + field);
}

namespace {

constexpr int kSodFields[] = {grid::kRho, grid::kSx, grid::kEgas};

// Reference conserved state of every x index at one level.
std::vector<State> sod_row(const RunConfig& cfg, const hydro::EosParams& eos, double x_interface, double x0, double h,
                           std::int64_t cells, double t) {
  const hydro::RiemannState L{cfg.sod_rho_l, 0.0, cfg.sod_p_l}, R{cfg.sod_rho_r, 0.0, cfg.sod_p_r};
  std::vector<State> out(cells);
  if (L.rho == R.rho && L.p == R.p) {
    const State s = make_state(L.rho, {0, 0, 0}, L.p, eos);
    std::fill(out.begin(), out.end(), s);
    return out;
  }
  const hydro::ExactRiemann ex(L, R, eos.gamma);
  const auto avg = ex.cell_averages(x_interface, x0, h, static_cast<int>(cells), t);
  for (std::int64_t i = 0; i < cells; ++i) out[i] = make_state(avg[i].rho, {avg[i].u, 0, 0}, avg[i].p, eos);
  return out;
}

}  // namespace

ReferenceReport compare_to_reference(const Octree& tree, const RunConfig& cfg, double time) {
  const Scenario& sc = find_scenario(cfg.scenario);
  ReferenceReport rep;
  rep.scenario = sc.name;
  rep.time = time;
  if (sc.name == "sedov") {
    rep.symmetry = octant_symmetry_deviation(tree);
    return rep;
  }
  if (sc.name != "sod") throw NoReference("scenario " + sc.name + " has no reference solution");
  const auto eos = hydro_config(sc, cfg).eos;
  const auto& gc = tree.config();
  const int n = gc.n;
  const double xi = gc.origin[0] + 0.5 * gc.length;
  std::vector<std::vector<State>> rows(tree.max_level() + 1);
  for (std::uint32_t l = 0; l < rows.size(); ++l)
    rows[l] = sod_row(cfg, eos, xi, gc.origin[0], gc.h(l), gc.cells(l), time);
  double l1[3] = {0, 0, 0}, linf[3] = {0, 0, 0}, vol = 0;
  for (const auto& [k, nd] : tree.nodes()) {
    if (!nd.leaf) continue;
    const double v = nd.grid.cell_volume();
    for (int i = 0; i < n; ++i) {
      const State& ref = rows[k.level][static_cast<std::size_t>(k.idx[0]) * n + i];
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          for (int q = 0; q < 3; ++q) {
            const double e = std::fabs(nd.grid.at(kSodFields[q], i, j, l) - ref[kSodFields[q]]);
            l1[q] += e * v;
            linf[q] = std::max(linf[q], e);
          }
          vol += v;
        }
    }
  }
  for (int q = 0; q < 3; ++q) rep.norms.push_back({grid::field_name(kSodFields[q]), l1[q] / vol, linf[q]});
  return rep;
}

double octant_symmetry_deviation(const Octree& tree) {
  const int n = tree.config().n;
  std::array<double, grid::kNumFields> scale{};
  for (const auto& [k, nd] : tree.nodes()) {
    if (!nd.leaf) continue;
    for (int f = 0; f < grid::kNumFields; ++f)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) scale[f] = std::max(scale[f], std::fabs(nd.grid.at(f, i, j, l)));
  }
  double dev = 0;
  for (const auto& [k, nd] : tree.nodes()) {
    if (!nd.leaf) continue;
    const std::uint32_t top = (1u << k.level) - 1;
    for (int m = 1; m < 8; ++m) {
      grid::Index3 idx = k.idx;
      for (int d = 0; d < 3; ++d)
        if (m >> d & 1) idx[d] = top - idx[d];
      const grid::TreeNode* mn = tree.find(TreeKey(k.level, idx));
      if (!mn || !mn->leaf) return std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) {
            const int c[3] = {i, j, l};
            int mc[3];
            for (int d = 0; d < 3; ++d) mc[d] = (m >> d & 1) ? n - 1 - c[d] : c[d];
            for (int f = 0; f < grid::kNumFields; ++f) {
              double b = mn->grid.at(f, mc[0], mc[1], mc[2]);
              if (f >= grid::kSx && f <= grid::kSz && (m >> (f - grid::kSx) & 1)) b = -b;
              const double e = std::fabs(nd.grid.at(f, i, j, l) - b);
              if (e > 0) dev = std::max(dev, e / scale[f]);
            }
          }
    }
  }
  return dev;
}

std::vector<ConvergenceRow> sod_convergence(const std::vector<int>& cells, const RunConfig& cfg, double t) {
  const Scenario& sc = find_scenario("sod");
  const auto hc = hydro_config(sc, cfg);
  std::vector<ConvergenceRow> out;
  for (int N : cells) {
    if (N < 4) throw std::invalid_argument("sod pencil needs at least 4 cells");
    const double h = 1.0 / N;
    grid::SubGrid g({N, 1, 1}, 2, h, {0.5 * h, 0.5, 0.5});
    for (int i = 0; i < N; ++i) {
      const bool left = g.center(i, 0, 0)[0] < 0.5;
      g.set_state(i, 0, 0,
                  make_state(left ? cfg.sod_rho_l : cfg.sod_rho_r, {0, 0, 0}, left ? cfg.sod_p_l : cfg.sod_p_r, hc.eos));
    }
    double time = 0;
    while (time < t) {
      const double dt = std::min(hydro::cfl_dt(g, hc.eos, hc.cfl), t - time);
      hydro::advance_block(g, dt, hc, grid::Boundary::Outflow);
      time += dt;
    }
    const auto ref = sod_row(cfg, hc.eos, 0.5, 0.0, h, N, t);
    ConvergenceRow row;
    row.cells = N;
    for (int i = 0; i < N; ++i) {
      const double e = std::fabs(g.at(grid::kRho, i, 0, 0) - ref[i][grid::kRho]);
      row.l1_rho += e * h;
      row.linf_rho = std::max(row.linf_rho, e);
    }
    if (!out.empty() && row.l1_rho > 0)
      row.order = std::log(out.back().l1_rho / row.l1_rho) / std::log(static_cast<double>(N) / out.back().cells);
    out.push_back(row);
  }
  return out;
}

}  // namespace okt::harness
