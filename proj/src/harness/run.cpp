#include "okt/harness/run.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "okt/grid/adapt.hpp"
#include "okt/grid/checkpoint.hpp"
#include "okt/harness/cluster.hpp"
#include "okt/harness/scenario.hpp"

namespace okt::harness {

using grid::Octree;
using grid::State;
using grid::TreeKey;

namespace {

using Clock = std::chrono::steady_clock;

State sum_totals(const std::map<TreeKey, LeafReport>& reps) {
  State s{};
  for (const auto& [k, r] : reps)
    for (int f = 0; f < grid::kNumFields; ++f) s[f] += r.totals[f];
  return s;
}

double rel(double now, double ref) {
  const double d = std::fabs(now - ref);
  return ref != 0 ? d / std::fabs(ref) : d;
}

std::vector<TreeKey> restart_refine_targets(const Octree& t, const Scenario& sc, const RunConfig& cfg) {
  std::vector<TreeKey> out;
  const std::uint32_t top = t.max_level();
  for (const auto& [k, nd] : t.nodes()) {
    if (!nd.leaf) continue;
    if (cfg.restart_refine == RestartRefine::All) out.push_back(k);
    else if (k.level == top && sc.refine(k, t.config(), cfg)) out.push_back(k);
  }
  return out;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  const Scenario& sc = find_scenario(cfg.scenario);
  RunMetrics m;
  m.scenario = sc.name;
  m.config = cfg;

  Octree tree;
  double time = 0;
  if (!cfg.restart.empty()) {
    grid::Checkpoint ck = grid::read_checkpoint(cfg.restart);
    const auto meta = parse_kv(ck.meta);
    if (auto it = meta.find("scenario"); it != meta.end() && it->second != cfg.scenario)
      throw grid::CheckpointError("checkpoint holds scenario '" + it->second + "' but the run asks for '" +
                                  cfg.scenario + "'");
    tree = std::move(ck.tree);
    m.first_step = ck.step;
    time = ck.time;
    if (cfg.restart_refine != RestartRefine::None) {
      const State before = tree.leaf_totals();
      grid::refine_leaves(tree, restart_refine_targets(tree, sc, cfg));
      const State after = tree.leaf_totals();
      m.refined_on_restart = true;
      for (int f = 0; f < grid::kNumFields; ++f) m.refine_change[f] = rel(after[f], before[f]);
    }
  } else {
    tree = build_scenario_tree(sc, cfg);
  }
  m.level_nodes = tree.level_node_counts();
  m.level_leaves = tree.level_leaf_counts();

  ClusterConfig cc;
  cc.localities = cfg.localities;
  cc.workers = cfg.workers;
  cc.streams = cfg.streams;
  cc.streams_per_worker = cfg.streams_per_worker;
  cc.network.backend = cfg.parcelport;
  cc.network.eager_threshold = cfg.eager_threshold;
  cc.hydro = hydro_config(sc, cfg);
  cc.hydro_enabled = sc.hydro;
  cc.gravity = sc.gravity;
  cc.fmm = fmm_config(cfg);
  cc.timeout_s = cfg.halo_timeout;
  cc.seed = cfg.seed;

  if (!cfg.output.empty()) std::filesystem::create_directories(cfg.output);
  Cluster cl(tree, cc);
  m.leaves_per_locality = cl.leaves_per_locality();
  m.workers_per_locality = cl.workers_per_locality();
  m.stencil_size = cl.stencil().size();
  const State initial = sum_totals(cl.reports());

  std::uint64_t step = m.first_step;
  while (step < static_cast<std::uint64_t>(cfg.steps)) {
    if (cfg.end_time > 0 && time >= cfg.end_time) break;
    const auto t0 = Clock::now();
    double dt = 0;
    if (sc.hydro) {
      dt = cl.cfl_dt();
      if (cfg.end_time > 0) dt = std::min(dt, cfg.end_time - time);
    }
    const StepResult sr = cl.step(dt);
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    ++step;
    time += dt;

    StepRecord rec;
    rec.step = step;
    rec.time = time;
    rec.dt = dt;
    rec.wall_s = wall;
    rec.leaf_updates = sr.leaf_updates;
    rec.subgrids_per_s = wall > 0 ? static_cast<double>(sr.leaf_updates) / wall : 0;
    const auto reps = cl.reports();
    rec.totals = sum_totals(reps);
    for (const auto& [k, lr] : reps) rec.momentum_scale += lr.momentum_abs;
    rec.mass_rel = rel(rec.totals[grid::kRho], initial[grid::kRho]);
    rec.energy_rel = rel(rec.totals[grid::kEgas], initial[grid::kEgas]);
    for (int d = 0; d < 3; ++d) rec.momentum_drift[d] = rec.totals[grid::kSx + d] - initial[grid::kSx + d];
    if (sc.gravity) {
      std::array<double, 3> f{0, 0, 0}, tq{0, 0, 0};
      double fs = 0, ts = 0;
      for (const auto& [k, r] : reps) {
        for (int d = 0; d < 3; ++d) {
          f[d] += r.gravity.force[d];
          tq[d] += r.gravity.torque[d];
        }
        fs += r.gravity.force_scale;
        ts += r.gravity.torque_scale;
      }
      fmm::ConservationResiduals g;
      g.force = f;
      g.torque = tq;
      g.force_scale = fs;
      g.torque_scale = ts;
      rec.gravity_force_rel = g.force_rel();
      rec.gravity_torque_rel = g.torque_rel();
    }
    rec.rho_floors = sr.floors.rho;
    rec.p_floors = sr.floors.p;
    m.interactions.merge(sr.interactions);
    m.elapsed_s += wall;
    m.leaf_updates += sr.leaf_updates;

    const bool dump = !cfg.output.empty() && cfg.output_every > 0 && step % cfg.output_every == 0;
    const bool ckpt = !cfg.checkpoint.empty() && cfg.checkpoint_step >= 0 &&
                      step == static_cast<std::uint64_t>(cfg.checkpoint_step);
    if (dump || ckpt) {
      const Octree snap = cl.gather();
      if (ckpt) grid::write_checkpoint(cfg.checkpoint, snap, step, time, to_kv_text(cfg));
      if (dump) {
        const std::string base = cfg.output + "/field_" + std::to_string(step);
        write_field_csv(base + ".csv", snap, cc.hydro.eos);
        write_field_vtk(base + ".vtk", snap, cc.hydro.eos);
      }
    }
    m.steps.push_back(rec);
  }

  RunResult r;
  r.tree = cl.gather();
  if (!cfg.checkpoint.empty() && cfg.checkpoint_step < 0)
    grid::write_checkpoint(cfg.checkpoint, r.tree, step, time, to_kv_text(cfg));
  m.subgrids_per_s = m.elapsed_s > 0 ? static_cast<double>(m.leaf_updates) / m.elapsed_s : 0;
  m.bytes = cl.bytes();
  m.simulated_network_us = cl.simulated_time_us();
  m.streams = cl.stream_counters();
  m.final_time = time;
  r.metrics = std::move(m);
  if (!cfg.output.empty()) write_outputs(cfg.output, r);
  return r;
}

bool same_state(const Octree& a, const Octree& b) {
  if (a.nodes().size() != b.nodes().size()) return false;
  const int n = a.config().n;
  if (b.config().n != n) return false;
  auto ib = b.nodes().begin();
  for (const auto& [k, na] : a.nodes()) {
    const auto& [kb, nb] = *ib++;
    if (!(k == kb) || na.leaf != nb.leaf) return false;
    if (!na.leaf) continue;
    for (int f = 0; f < grid::kNumFields; ++f)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (std::memcmp(na.grid.field(f) + na.grid.index(i, j, 0), nb.grid.field(f) + nb.grid.index(i, j, 0),
                          sizeof(double) * n) != 0) return false;
  }
  return true;
}

std::vector<ScalingRow> scaling_sweep(const RunConfig& base, const std::vector<int>& localities,
                                      const std::vector<int>& workers) {
  const std::size_t rows = std::max(localities.size(), workers.size());
  if ((localities.size() != rows && localities.size() != 1) || (workers.size() != rows && workers.size() != 1))
    throw ConfigError("scaling sweep: locality and worker lists must have equal length or length 1");
  std::vector<ScalingRow> out;
  for (std::size_t i = 0; i < rows; ++i) {
    RunConfig c = base;
    c.localities = localities.size() == 1 ? localities[0] : localities[i];
    c.workers = workers.size() == 1 ? workers[0] : workers[i];
    c.output.clear();
    c.checkpoint.clear();
    c.restart.clear();
    const auto r = run(c);
    ScalingRow row{c.localities, c.workers, r.metrics.subgrids_per_s, 0};
    row.speedup = out.empty() ? 1.0 : row.subgrids_per_s / out.front().subgrids_per_s;
    out.push_back(row);
  }
  return out;
}

}  // namespace okt::harness
