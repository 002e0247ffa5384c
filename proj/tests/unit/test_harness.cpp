#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "okt/fmm/solver.hpp"
#include "okt/grid/checkpoint.hpp"
#include "okt/harness/cluster.hpp"
#include "okt/harness/netbench.hpp"
#include "okt/harness/reference.hpp"
#include "okt/harness/run.hpp"
#include "okt/harness/scenario.hpp"

using namespace okt;
using namespace okt::harness;
using grid::Octree;
using grid::TreeKey;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "okt_harness_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

RunConfig small(const std::string& scenario, int steps = 4) {
  RunConfig c;
  c.scenario = scenario;
  c.levels = 2;
  c.steps = steps;
  return c;
}

}  // namespace

TEST_CASE("config layers defaults, file, then flags") {
  const auto file = parse_kv("# comment\nscenario = sedov\nlevels=3\nworkers = 2  # trailing\n\n");
  CHECK(file.at("scenario") == "sedov");
  const auto c = layered_config(file, {{"levels", "4"}, {"eager-threshold", "128"}});
  CHECK(c.scenario == "sedov");
  CHECK(c.levels == 4);
  CHECK(c.workers == 2);
  CHECK(c.eager_threshold == 128);
  CHECK(c.theta == 0.5);

  RunConfig back;
  for (const auto& [k, v] : to_kv(c)) set_option(back, k, v);
  CHECK(to_kv(back) == to_kv(c));
}

TEST_CASE("config errors name the key") {
  RunConfig c;
  CHECK_THROWS_WITH_AS(set_option(c, "levles", "3"), doctest::Contains("levles"), ConfigError);
  CHECK_THROWS_AS(set_option(c, "levels", "three"), ConfigError);
  CHECK_THROWS_AS(set_option(c, "parcelport", "udp"), ConfigError);
  CHECK_THROWS_AS(parse_kv("levels 3"), ConfigError);
  CHECK_THROWS_AS(layered_config({}, {{"workers", "0"}}), ConfigError);
  CHECK_THROWS_AS(layered_config({}, {{"theta", "1.5"}}), std::invalid_argument);
}

TEST_CASE("unknown scenario") {
  CHECK_THROWS_AS(find_scenario("v1309"), UnknownScenario);
  CHECK_THROWS_AS(run(small("v1309")), UnknownScenario);
  CHECK(scenario_names() ==
        std::vector<std::string>{"sod", "sedov", "star_at_rest", "star_in_motion", "two_body", "random_density"});
}

TEST_CASE("sod at t=0 is the exact discontinuity") {
  RunConfig c = small("sod");
  c.levels = 3;
  const auto& sc = find_scenario("sod");
  const Octree t = build_scenario_tree(sc, c);
  const auto eos = hydro_config(sc, c).eos;
  const int n = t.config().n;
  std::size_t cells = 0;
  for (const auto& [k, nd] : t.nodes()) {
    if (!nd.leaf) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const auto w = hydro::to_primitive(nd.grid.state(i, j, l), eos);
          const bool left = nd.grid.center(i, j, l)[0] < 0.5;
          CHECK(w.rho == (left ? 1.0 : 0.125));
          CHECK(w.p == doctest::Approx(left ? 1.0 : 0.1).epsilon(1e-15));
          CHECK(w.v[0] == 0.0);
          ++cells;
        }
  }
  CHECK(cells > 0);
  // the plane is resolved at the finest level
  for (const auto& [k, nd] : t.nodes())
    if (nd.leaf) {
      const auto b = node_box(t.config(), k);
      if (b[0][0] <= 0.5 && 0.5 <= b[1][0]) CHECK(k.level == t.max_level());
    }
}

TEST_CASE("sedov deposits exactly E0") {
  for (double e0 : {1.0, 0.37}) {
    RunConfig c = small("sedov");
    c.levels = 3;
    c.e0 = e0;
    const Octree t = build_scenario_tree(find_scenario("sedov"), c);
    CHECK(std::fabs(sedov_deposited_energy(t, c) - e0) <= 1e-13 * e0);
  }
}

TEST_CASE("two_body: equal masses feel equal and opposite net forces") {
  RunConfig c = small("two_body");
  const Octree t = build_scenario_tree(find_scenario("two_body"), c);
  const auto g = fmm::solve_gravity(t, fmm_config(c));
  std::array<double, 3> f[2] = {{0, 0, 0}, {0, 0, 0}};
  const int n = t.config().n;
  for (const auto& [k, nd] : t.nodes()) {
    if (!nd.leaf) continue;
    const double v = std::pow(nd.grid.h(), 3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const auto& gc = g.leaves.at(k)[(i * n + j) * n + l];
          for (int b = 0; b < 2; ++b) {
            const double m = nd.grid.at(grid::kFrac0 + b, i, j, l) * v;  // partial density
            for (int d = 0; d < 3; ++d) f[b][d] += m * gc.g[d];
          }
        }
  }
  CHECK(f[0][0] > 0);  // left blob pulled right
  CHECK(f[1][0] < 0);
  for (int d = 0; d < 3; ++d) CHECK(std::fabs(f[0][d] + f[1][d]) <= 1e-10 * std::fabs(f[0][0]));
}

TEST_CASE("random_density is seeded") {
  RunConfig a = small("random_density");
  RunConfig b = a;
  const auto& sc = find_scenario("random_density");
  CHECK(same_state(build_scenario_tree(sc, a), build_scenario_tree(sc, b)));
  b.seed = 2;
  CHECK_FALSE(same_state(build_scenario_tree(sc, a), build_scenario_tree(sc, b)));
}

TEST_CASE("sod, one locality, 10 steps") {
  RunConfig c = small("sod", 10);
  const auto r = run(c);
  REQUIRE(r.metrics.steps.size() == 10);
  CHECK(r.metrics.subgrids_per_s > 0);
  std::uint64_t updates = 0;
  for (const auto& s : r.metrics.steps) {
    CHECK(s.subgrids_per_s > 0);
    CHECK(s.leaf_updates == r.tree.leaf_count());
    updates += s.leaf_updates;
    // outflow edges see only round-off from waves that have not arrived
    CHECK(s.mass_rel <= 1e-6);
    CHECK(s.energy_rel <= 1e-6);
    CHECK(s.momentum_drift[1] == 0.0);
  }
  CHECK(updates == r.metrics.leaf_updates);
  CHECK(r.metrics.subgrids_per_s == doctest::Approx(updates / r.metrics.elapsed_s));
  CHECK(r.metrics.bytes.messages == 0);
}

TEST_CASE("closed periodic box conserves through the cluster") {
  grid::GridConfig gc;
  gc.n = 4;
  gc.boundary = grid::Boundary::Periodic;
  Octree t = grid::build_tree(gc, 3, [](const TreeKey& k) { return k.level == 0 || (k.level == 1 && k.idx[0] == 0); });
  hydro::HydroConfig hc;
  for (auto& [k, nd] : t.nodes())
    if (nd.leaf)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int l = 0; l < 4; ++l) {
            const auto x = nd.grid.center(i, j, l);
            nd.grid.set_state(i, j, l, make_state(1 + 0.5 * std::sin(6.283185307179586 * x[0]), {0.2, -0.1, 0.05},
                                                  1.0, hc.eos));
          }
  t.restrict_all();
  ClusterConfig cc;
  cc.localities = 3;
  cc.hydro = hc;
  Cluster cl(t, cc);
  const auto before = t.leaf_totals();
  for (int s = 0; s < 20; ++s) cl.step(cl.cfl_dt());
  const auto after = cl.gather().leaf_totals();
  CHECK(std::fabs(after[grid::kRho] - before[grid::kRho]) <= 1e-13 * before[grid::kRho]);
  for (int d = 0; d < 3; ++d)
    CHECK(std::fabs(after[grid::kSx + d] - before[grid::kSx + d]) <= 1e-13 * std::fabs(before[grid::kSx + d]));
  CHECK(std::fabs(after[grid::kEgas] - before[grid::kEgas]) <= 1e-13 * before[grid::kEgas]);
}

TEST_CASE("cluster matches the serial solvers bitwise") {
  for (const char* name : {"sod", "two_body"}) {
    RunConfig c = small(name);
    const auto& sc = find_scenario(name);
    const Octree base = build_scenario_tree(sc, c);
    const auto hc = hydro_config(sc, c);
    const auto fc = fmm_config(c);
    Octree serial = base;
    std::vector<double> dts;
    const hydro::GravitySolve gs = [&](const Octree& t) { return fmm::solve_gravity(t, fc); };
    for (int s = 0; s < 2; ++s) {
      double dt = hydro::cfl_dt(serial, hc.eos, hc.cfl);
      if (sc.gravity) dt = std::min(dt, hydro::gravity_dt(serial, gs(serial), hc.cfl));
      dts.push_back(dt);
      hydro::advance(serial, dt, hc, sc.gravity ? gs : hydro::GravitySolve{});
    }
    for (int P : {1, 2, 5}) {
      ClusterConfig cc;
      cc.localities = P;
      cc.workers = 2;
      cc.hydro = hc;
      cc.gravity = sc.gravity;
      cc.fmm = fc;
      Cluster cl(base, cc);
      for (int s = 0; s < 2; ++s) {
        const double dt = cl.cfl_dt();
        CHECK(dt == dts[s]);
        cl.step(dt);
      }
      CHECK(same_state(cl.gather(), serial));
      if (P > 1) CHECK(cl.bytes().messages > 0);
    }
  }
}

TEST_CASE("cluster gravity equals the serial field") {
  RunConfig c = small("random_density");
  c.levels = 3;
  c.refine_fraction = 0.3;
  const Octree t = build_scenario_tree(find_scenario("random_density"), c);
  const auto serial = fmm::solve_gravity(t, fmm_config(c));
  ClusterConfig cc;
  cc.localities = 3;
  cc.workers = 3;
  cc.gravity = true;
  cc.hydro_enabled = false;
  cc.fmm = fmm_config(c);
  Cluster cl(t, cc);
  const auto g = cl.gravity();
  CHECK(g.leaves == serial.leaves);
  CHECK(g.counters.pairs == serial.counters.pairs);
  for (const auto& [k, r] : cl.reports()) CHECK(r.gravity.force_scale > 0);
}

TEST_CASE("partition and worker split") {
  RunConfig c = small("sedov");
  c.levels = 3;
  const Octree t = build_scenario_tree(find_scenario("sedov"), c);
  ClusterConfig cc;
  cc.localities = 3;
  cc.workers = 7;
  cc.hydro = hydro_config(find_scenario("sedov"), c);
  Cluster cl(t, cc);
  std::size_t sum = 0;
  for (auto n : cl.leaves_per_locality()) sum += n;
  CHECK(sum == t.leaf_count());
  CHECK(cl.workers_per_locality() == std::vector<int>{3, 2, 2});
  cc.workers = 2;
  Cluster few(t, cc);
  CHECK(few.workers_per_locality() == std::vector<int>{1, 1, 1});
}

TEST_CASE("checkpoint at 5 then restart to 10 is bitwise the 10-step run") {
  for (const char* name : {"sedov", "star_at_rest"}) {
    RunConfig c = small(name, 10);
    c.localities = 2;
    const auto full = run(c);
    RunConfig a = c;
    a.checkpoint = scratch(std::string(name) + ".ckpt");
    a.checkpoint_step = 5;
    const auto first = run(a);
    CHECK(first.metrics.steps.size() == 10);
    RunConfig b = c;
    b.restart = a.checkpoint;
    const auto resumed = run(b);
    CHECK(resumed.metrics.first_step == 5);
    CHECK(resumed.metrics.steps.size() == 5);
    CHECK(resumed.metrics.final_time == full.metrics.final_time);
    CHECK(same_state(resumed.tree, full.tree));
  }
}

TEST_CASE("refine on restart conserves totals") {
  RunConfig c = small("star_in_motion", 2);
  c.checkpoint = scratch("refine.ckpt");
  run(c);
  const Octree before = grid::read_checkpoint(c.checkpoint).tree;
  for (auto mode : {RestartRefine::All, RestartRefine::Scenario}) {
    RunConfig r = c;
    r.checkpoint.clear();
    r.restart = c.checkpoint;
    r.restart_refine = mode;
    const auto res = run(r);
    CHECK(res.metrics.refined_on_restart);
    CHECK(res.tree.leaf_count() > before.leaf_count());
    CHECK(res.tree.is_graded());
    const auto a = before.leaf_totals(), b = res.tree.leaf_totals();
    for (int f = 0; f < grid::kNumFields; ++f) {
      const double scale = std::max(std::fabs(a[f]), 1e-300);
      CHECK(std::fabs(b[f] - a[f]) <= 1e-13 * scale);
      CHECK(res.metrics.refine_change[f] <= 1e-13);
    }
  }
}

TEST_CASE("restart errors") {
  RunConfig c = small("sod", 1);
  c.checkpoint = scratch("bad.ckpt");
  run(c);
  RunConfig other = small("sedov", 2);
  other.restart = c.checkpoint;
  CHECK_THROWS_AS(run(other), grid::CheckpointError);

  {
    std::fstream f(c.checkpoint, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const std::uint32_t v = 999;
    f.write(reinterpret_cast<const char*>(&v), 4);
  }
  RunConfig same = small("sod", 2);
  same.restart = c.checkpoint;
  CHECK_THROWS_WITH_AS(run(same), doctest::Contains("version"), grid::CheckpointError);
}

TEST_CASE("constant state gives zero error norms") {
  RunConfig c = small("sod", 3);
  c.sod_rho_r = c.sod_rho_l;
  c.sod_p_r = c.sod_p_l;
  const auto r = run(c);
  const auto rep = compare_to_reference(r.tree, c, r.metrics.final_time);
  REQUIRE(!rep.norms.empty());
  for (const auto& n : rep.norms) {
    CHECK(n.l1 == 0.0);
    CHECK(n.linf == 0.0);
  }
}

TEST_CASE("sod error norms shrink with time-matched reference") {
  RunConfig c = small("sod", 6);
  c.levels = 3;
  const auto r = run(c);
  const auto rep = compare_to_reference(r.tree, c, r.metrics.final_time);
  CHECK(rep.norm("rho").l1 > 0);
  CHECK(rep.norm("rho").l1 < 0.05);
  // comparing against the wrong time is worse
  const auto off = compare_to_reference(r.tree, c, 2 * r.metrics.final_time);
  CHECK(off.norm("rho").l1 > rep.norm("rho").l1);
  CHECK_THROWS_AS(compare_to_reference(r.tree, small("two_body"), 0.1), NoReference);
}

TEST_CASE("sedov keeps octant symmetry") {
  RunConfig c = small("sedov", 8);
  c.levels = 3;
  c.localities = 3;
  c.workers = 3;
  const auto r = run(c);
  const auto rep = compare_to_reference(r.tree, c, r.metrics.final_time);
  CHECK(rep.symmetry <= 1e-12);
  CHECK(octant_symmetry_deviation(r.tree) == rep.symmetry);
  // an off-center deposit is caught
  Octree t = r.tree;
  auto& nd = t.node(t.leaves().front());
  nd.grid.at(grid::kRho, 0, 0, 0) *= 1.01;
  CHECK(octant_symmetry_deviation(t) > 1e-4);
}

TEST_CASE("sod convergence order") {
  const auto rows = sod_convergence({64, 128, 256}, RunConfig{}, 0.2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].l1_rho < rows[0].l1_rho);
  CHECK(rows[2].l1_rho < rows[1].l1_rho);
  CHECK(rows[1].order >= 0.8);
  CHECK(rows[2].order >= 0.8);
}

TEST_CASE("both parcelports give the same state") {
  for (const char* name : {"sod", "two_body"}) {
    RunConfig c = small(name, 3);
    c.localities = 4;
    c.parcelport = parcel::Backend::TwoSided;
    const auto a = run(c);
    c.parcelport = parcel::Backend::OneSided;
    const auto b = run(c);
    CHECK(same_state(a.tree, b.tree));
    CHECK(a.metrics.bytes.matching_path_bytes > b.metrics.bytes.matching_path_bytes);
  }
}

TEST_CASE("synthetic halo accounting") {
  HaloWorkload w;
  const auto two = synthetic_halo(parcel::Backend::TwoSided, w);
  const auto one = synthetic_halo(parcel::Backend::OneSided, w);
  const std::uint64_t sends = static_cast<std::uint64_t>(w.localities) * w.neighbors * w.rounds;
  // two-sided pushes every payload through matching; one-sided only descriptors
  CHECK(two.bytes.rendezvous_messages == 0);
  CHECK(two.bytes.matching_path_bytes >= sends * w.bytes);
  CHECK(one.bytes.rendezvous_messages == sends);
  CHECK(one.bytes.rma_bytes == sends * w.bytes);
  CHECK(one.bytes.matching_path_bytes * 20 < two.bytes.matching_path_bytes);
  CHECK(one.simulated_us < two.simulated_us);
  w.bytes = 512;  // below the eager threshold both paths are alike
  const auto small2 = synthetic_halo(parcel::Backend::TwoSided, w);
  const auto small1 = synthetic_halo(parcel::Backend::OneSided, w);
  CHECK(small1.bytes.rendezvous_messages == 0);
  CHECK(small1.bytes.rma_bytes == 0);
  CHECK(small1.bytes.matching_path_bytes == small2.bytes.matching_path_bytes);
}

TEST_CASE("uniform trees grow by 8 per level") {
  RunConfig c = small("sedov");
  for (int L : {1, 2, 3}) {
    grid::GridConfig gc;
    gc.n = 4;
    const Octree t = grid::build_uniform_tree(gc, L);
    const auto counts = t.level_node_counts();
    REQUIRE(counts.size() == static_cast<std::size_t>(L));
    for (int l = 1; l < L; ++l) CHECK(counts[l] == 8 * counts[l - 1]);
  }
  c.levels = 3;
  c.n = 4;
  c.steps = 1;
  const auto r = run(c);
  CHECK(r.metrics.level_nodes == r.tree.level_node_counts());
}

TEST_CASE("outputs are written and parseable") {
  RunConfig c = small("two_body", 3);
  c.localities = 2;
  c.output = scratch("out");
  c.output_every = 2;
  std::filesystem::remove_all(c.output);
  const auto r = run(c);
  for (const char* f : {"metrics.csv", "conservation.csv", "parcel_bytes.csv", "stream_counters.csv", "levels.csv",
                        "summary.csv", "stencil_report.csv", "stencil_offsets.csv", "field.csv", "field.vtk",
                        "field_2.csv", "field_2.vtk"})
    CHECK_MESSAGE(std::filesystem::exists(c.output + "/" + f), f);

  const auto m = read_csv(c.output + "/metrics.csv");
  REQUIRE(m.size() == 4);
  CHECK(m[0][0] == "step");
  for (std::size_t i = 1; i < m.size(); ++i) {
    CHECK(m[i].size() == m[0].size());
    CHECK(std::stod(m[i][5]) > 0);
  }
  const auto cons = read_csv(c.output + "/conservation.csv");
  REQUIRE(cons.size() == 4);
  const auto gcol = std::find(cons[0].begin(), cons[0].end(), "gravity_force_rel") - cons[0].begin();
  CHECK(std::stod(cons[3][gcol]) <= 1e-12);

  const auto st = read_csv(c.output + "/stencil_report.csv");
  bool found = false;
  for (const auto& row : st)
    if (row[0] == "0.5") {
      CHECK(row[2] == "1074");
      found = true;
    }
  CHECK(found);
  CHECK(read_csv(c.output + "/stencil_offsets.csv").size() == 1075);

  const auto field = read_csv(c.output + "/field.csv");
  CHECK(field.size() == 1 + r.tree.leaf_count() * 512);

  const auto pb = read_csv(c.output + "/parcel_bytes.csv");
  REQUIRE(pb.size() == 2);
  CHECK(std::stoull(pb[1][2]) == r.metrics.bytes.messages);

  std::ifstream vtk(c.output + "/field.vtk");
  std::string head;
  std::getline(vtk, head);
  CHECK(head == "# vtk DataFile Version 3.0");

  bool offload_rows = false;
  for (const auto& row : read_csv(c.output + "/stream_counters.csv"))
    if (row[1] == "hydro_flux") offload_rows = true;
  CHECK(offload_rows);
}

TEST_CASE("scaling sweep is normalized to the first row") {
  RunConfig c = small("sod", 2);
  const auto rows = scaling_sweep(c, {1, 2, 4}, {1});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].speedup == 1.0);
  for (const auto& r : rows) {
    CHECK(r.subgrids_per_s > 0);
    CHECK(r.speedup == doctest::Approx(r.subgrids_per_s / rows[0].subgrids_per_s));
  }
  CHECK(rows[2].localities == 4);
  CHECK_THROWS_AS(scaling_sweep(c, {1, 2}, {1, 2, 3}), ConfigError);
}
