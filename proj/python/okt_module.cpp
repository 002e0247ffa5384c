#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "okt/fmm/solver.hpp"
#include "okt/fmm/stencil.hpp"
#include "okt/harness/netbench.hpp"
#include "okt/harness/reference.hpp"
#include "okt/harness/run.hpp"
#include "okt/harness/scenario.hpp"
#include "okt/runtime/offload_sim.hpp"

namespace py = pybind11;
using namespace okt;

namespace {

harness::RunConfig config_from(const py::dict& kw) {
  std::map<std::string, std::string> cli;
  for (const auto& [k, v] : kw) {
    std::string s;
    if (py::isinstance<py::bool_>(v)) s = v.cast<bool>() ? "1" : "0";
    else s = py::str(v).cast<std::string>();
    cli[k.cast<std::string>()] = s;
  }
  return harness::layered_config({}, cli);
}

py::dict counters_dict(const parcel::ByteCounters& b) {
  py::dict d;
  d["messages"] = b.messages;
  d["header_bytes"] = b.header_bytes;
  d["eager_bytes"] = b.eager_bytes;
  d["rma_bytes"] = b.rma_bytes;
  d["matching_path_bytes"] = b.matching_path_bytes;
  d["rendezvous_messages"] = b.rendezvous_messages;
  d["loopback_messages"] = b.loopback_messages;
  d["backpressure_events"] = b.backpressure_events;
  d["total_bytes"] = b.total_bytes();
  return d;
}

py::dict metrics_dict(const harness::RunMetrics& m) {
  py::dict d;
  d["scenario"] = m.scenario;
  d["config"] = harness::to_kv(m.config);
  d["first_step"] = m.first_step;
  d["elapsed_s"] = m.elapsed_s;
  d["leaf_updates"] = m.leaf_updates;
  d["subgrids_per_s"] = m.subgrids_per_s;
  d["level_nodes"] = m.level_nodes;
  d["level_leaves"] = m.level_leaves;
  d["leaves_per_locality"] = m.leaves_per_locality;
  d["workers_per_locality"] = m.workers_per_locality;
  d["bytes"] = counters_dict(m.bytes);
  d["simulated_network_us"] = m.simulated_network_us;
  d["stencil_size"] = m.stencil_size;
  d["final_time"] = m.final_time;
  d["refined_on_restart"] = m.refined_on_restart;
  d["refine_change"] = std::vector<double>(m.refine_change.begin(), m.refine_change.end());
  py::list steps;
  for (const auto& s : m.steps) {
    py::dict r;
    r["step"] = s.step;
    r["time"] = s.time;
    r["dt"] = s.dt;
    r["wall_s"] = s.wall_s;
    r["leaf_updates"] = s.leaf_updates;
    r["subgrids_per_s"] = s.subgrids_per_s;
    r["totals"] = std::vector<double>(s.totals.begin(), s.totals.end());
    r["mass_rel"] = s.mass_rel;
    r["energy_rel"] = s.energy_rel;
    r["momentum_drift"] = s.momentum_drift;
    r["gravity_force_rel"] = s.gravity_force_rel;
    r["gravity_torque_rel"] = s.gravity_torque_rel;
    r["rho_floors"] = s.rho_floors;
    r["p_floors"] = s.p_floors;
    steps.append(r);
  }
  d["steps"] = steps;
  py::dict streams;
  for (std::size_t l = 0; l < m.streams.size(); ++l)
    for (const auto& [name, c] : m.streams[l]) {
      py::dict e;
      e["offloaded"] = c.offloaded;
      e["ran_local"] = c.ran_local;
      e["offload_fraction"] = c.offload_fraction();
      streams[py::str(std::to_string(l) + "/" + name)] = e;
    }
  d["streams"] = streams;
  return d;
}

// Leaf cells as columns: level, x, y, z, h and one column per field.
py::dict cells_of(const grid::Octree& t) {
  const int n = t.config().n;
  const std::size_t N = t.leaf_count() * static_cast<std::size_t>(n) * n * n;
  py::array_t<double> x({N, std::size_t{3}}), h(N), q({N, std::size_t{grid::kNumFields}});
  py::array_t<int> level(N);
  auto X = x.mutable_unchecked<2>();
  auto H = h.mutable_unchecked<1>();
  auto Q = q.mutable_unchecked<2>();
  auto L = level.mutable_unchecked<1>();
  std::size_t c = 0;
  for (const auto& [k, nd] : t.nodes()) {
    if (!nd.leaf) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l, ++c) {
          const auto p = nd.grid.center(i, j, l);
          for (int d = 0; d < 3; ++d) X(c, d) = p[d];
          H(c) = nd.grid.h();
          L(c) = static_cast<int>(k.level);
          for (int f = 0; f < grid::kNumFields; ++f) Q(c, f) = nd.grid.at(f, i, j, l);
        }
  }
  py::dict d;
  d["x"] = x;
  d["h"] = h;
  d["level"] = level;
  d["state"] = q;
  std::vector<std::string> names;
  for (int f = 0; f < grid::kNumFields; ++f) names.push_back(grid::field_name(f));
  d["fields"] = names;
  return d;
}

}  // namespace

PYBIND11_MODULE(_okt, m) {
  m.doc() = "Octree AMR hydrodynamics with FMM gravity on simulated localities.";

  py::class_<harness::RunResult>(m, "RunResult")
      .def_property_readonly("metrics", [](const harness::RunResult& r) { return metrics_dict(r.metrics); })
      .def("cells", [](const harness::RunResult& r) { return cells_of(r.tree); })
      .def("leaf_count", [](const harness::RunResult& r) { return r.tree.leaf_count(); })
      .def("same_state", [](const harness::RunResult& a, const harness::RunResult& b) {
        return harness::same_state(a.tree, b.tree);
      })
      .def("reference", [](const harness::RunResult& r) {
        const auto rep = harness::compare_to_reference(r.tree, r.metrics.config, r.metrics.final_time);
        py::dict d;
        for (const auto& n : rep.norms) d[py::str(n.field)] = py::make_tuple(n.l1, n.linf);
        d["symmetry"] = rep.symmetry;
        return d;
      })
      .def("write_outputs", [](const harness::RunResult& r, const std::string& dir) { harness::write_outputs(dir, r); });

  m.def("scenarios", &harness::scenario_names);
  m.def("option_keys", &harness::option_keys);
  m.def(
      "config", [](const py::kwargs& kw) { return harness::to_kv(config_from(kw)); },
      "Validated config with every key, from keyword overrides.");
  m.def(
      "run",
      [](const py::kwargs& kw) {
        const auto cfg = config_from(kw);
        py::gil_scoped_release nogil;
        return harness::run(cfg);
      },
      "Runs a scenario; keywords are config keys (scenario, levels, localities, workers, steps, ...).");

  m.def(
      "stencil",
      [](double theta) {
        fmm::FmmConfig c;
        c.theta = theta;
        const auto st = fmm::generate_stencil(c);
        py::array_t<int> a({st.size(), std::size_t{3}});
        auto A = a.mutable_unchecked<2>();
        for (std::size_t i = 0; i < st.size(); ++i)
          for (int d = 0; d < 3; ++d) A(i, d) = st.offsets[i].d[d];
        return a;
      },
      py::arg("theta") = 0.5);

  m.def(
      "gravity",
      [](const py::kwargs& kw) {
        const auto cfg = config_from(kw);
        const auto& sc = harness::find_scenario(cfg.scenario);
        const auto tree = harness::build_scenario_tree(sc, cfg);
        const auto pts = fmm::leaf_points(tree);
        const auto g = fmm::flatten(fmm::solve_gravity(tree, harness::fmm_config(cfg)), pts);
        py::array_t<double> x({pts.size(), std::size_t{3}}), mass(pts.size()), acc({pts.size(), std::size_t{3}}),
            phi(pts.size());
        auto X = x.mutable_unchecked<2>();
        auto M = mass.mutable_unchecked<1>();
        auto G = acc.mutable_unchecked<2>();
        auto P = phi.mutable_unchecked<1>();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          M(i) = pts[i].m;
          P(i) = g[i].phi;
          for (int d = 0; d < 3; ++d) {
            X(i, d) = pts[i].x[d];
            G(i, d) = g[i].g[d];
          }
        }
        py::dict d;
        d["x"] = x;
        d["m"] = mass;
        d["g"] = acc;
        d["phi"] = phi;
        return d;
      },
      "FMM field of a scenario's initial state, one row per leaf cell.");

  m.def(
      "synthetic_halo",
      [](const std::string& backend, std::size_t bytes, int localities, int neighbors, int rounds) {
        harness::HaloWorkload w;
        w.bytes = bytes;
        w.localities = localities;
        w.neighbors = neighbors;
        w.rounds = rounds;
        const auto r = harness::synthetic_halo(parcel::backend_from_string(backend), w);
        py::dict d = counters_dict(r.bytes);
        d["simulated_us"] = r.simulated_us;
        return d;
      },
      py::arg("backend"), py::arg("bytes") = 64 * 1024, py::arg("localities") = 8, py::arg("neighbors") = 3,
      py::arg("rounds") = 4);

  m.def(
      "offload_fraction",
      [](int workers, int slots, std::uint64_t seed) {
        runtime::OffloadSimConfig c;
        c.workers = workers;
        c.slots = slots;
        c.seed = seed;
        return runtime::simulate_offload(c).fraction();
      },
      py::arg("workers"), py::arg("slots") = 128, py::arg("seed") = 7);

  m.def(
      "sod_convergence",
      [](const std::vector<int>& cells, double t) {
        py::list out;
        for (const auto& r : harness::sod_convergence(cells, harness::RunConfig{}, t))
          out.append(py::make_tuple(r.cells, r.l1_rho, r.linf_rho, r.order));
        return out;
      },
      py::arg("cells"), py::arg("t") = 0.2);

  py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<harness::UnknownScenario>(m, "UnknownScenario", PyExc_KeyError);
  py::register_exception<harness::NoReference>(m, "NoReference", PyExc_ValueError);
}
