#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "okt/fmm/stencil.hpp"
#include "okt/harness/run.hpp"
#include "okt/harness/scenario.hpp"

namespace okt::harness {

using grid::Octree;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  return out;
}

template <class F>
void for_each_cell(const Octree& t, F&& f) {
  const int n = t.config().n;
  for (const auto& [k, nd] : t.nodes()) {
    if (!nd.leaf) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) f(k, nd.grid, i, j, l);
  }
}

}  // namespace

void write_metrics_csv(const std::string& path, const RunMetrics& m) {
  auto out = open_out(path);
  out << "step,time,dt,wall_s,leaf_updates,subgrids_per_s,localities,workers,parcelport,rho_floors,p_floors\n";
  for (const auto& s : m.steps)
    out << s.step << ',' << s.time << ',' << s.dt << ',' << s.wall_s << ',' << s.leaf_updates << ','
        << s.subgrids_per_s << ',' << m.config.localities << ',' << m.config.workers << ','
        << parcel::to_string(m.config.parcelport) << ',' << s.rho_floors << ',' << s.p_floors << '\n';
}

void write_conservation_csv(const std::string& path, const RunMetrics& m) {
  auto out = open_out(path);
  out << "step,time,mass,sx,sy,sz,egas,mass_rel,energy_rel,dpx,dpy,dpz,momentum_scale,gravity_force_rel,"
         "gravity_torque_rel\n";
  for (const auto& s : m.steps)
    out << s.step << ',' << s.time << ',' << s.totals[grid::kRho] << ',' << s.totals[grid::kSx] << ','
        << s.totals[grid::kSy] << ',' << s.totals[grid::kSz] << ',' << s.totals[grid::kEgas] << ',' << s.mass_rel
        << ',' << s.energy_rel << ',' << s.momentum_drift[0] << ',' << s.momentum_drift[1] << ','
        << s.momentum_drift[2] << ',' << s.momentum_scale << ',' << s.gravity_force_rel << ','
        << s.gravity_torque_rel << '\n';
}

void write_parcel_bytes_csv(const std::string& path, const RunMetrics& m) {
  auto out = open_out(path);
  const auto& b = m.bytes;
  out << "parcelport,eager_threshold,messages,header_bytes,eager_bytes,rma_bytes,matching_path_bytes,"
         "rendezvous_messages,loopback_messages,backpressure_events,total_bytes,simulated_us\n";
  out << parcel::to_string(m.config.parcelport) << ',' << m.config.eager_threshold << ',' << b.messages << ','
      << b.header_bytes << ',' << b.eager_bytes << ',' << b.rma_bytes << ',' << b.matching_path_bytes << ','
      << b.rendezvous_messages << ',' << b.loopback_messages << ',' << b.backpressure_events << ','
      << b.total_bytes() << ',' << m.simulated_network_us << '\n';
}

void write_stream_counters_csv(const std::string& path, const RunMetrics& m) {
  auto out = open_out(path);
  out << "locality,kernel_class,offloaded,ran_local,offload_fraction\n";
  for (std::size_t l = 0; l < m.streams.size(); ++l)
    for (const auto& [name, c] : m.streams[l])
      out << l << ',' << name << ',' << c.offloaded << ',' << c.ran_local << ',' << c.offload_fraction() << '\n';
}

void write_levels_csv(const std::string& path, const RunMetrics& m) {
  auto out = open_out(path);
  out << "level,nodes,leaves\n";
  for (std::size_t l = 0; l < m.level_nodes.size(); ++l)
    out << l << ',' << m.level_nodes[l] << ',' << (l < m.level_leaves.size() ? m.level_leaves[l] : 0) << '\n';
}

void write_field_csv(const std::string& path, const Octree& tree, const hydro::EosParams& eos) {
  auto out = open_out(path);
  out << "level,x,y,z,h";
  for (int f = 0; f < grid::kNumFields; ++f) out << ',' << grid::field_name(f);
  out << ",vx,vy,vz,p\n";
  for_each_cell(tree, [&](const grid::TreeKey& k, const grid::SubGrid& g, int i, int j, int l) {
    const auto x = g.center(i, j, l);
    const auto s = g.state(i, j, l);
    out << k.level << ',' << x[0] << ',' << x[1] << ',' << x[2] << ',' << g.h();
    for (int f = 0; f < grid::kNumFields; ++f) out << ',' << s[f];
    const auto w = hydro::to_primitive(s, eos);
    out << ',' << w.v[0] << ',' << w.v[1] << ',' << w.v[2] << ',' << w.p << '\n';
  });
}

void write_field_vtk(const std::string& path, const Octree& tree, const hydro::EosParams& eos) {
  auto out = open_out(path);
  std::size_t cells = 0;
  for_each_cell(tree, [&](auto&&...) { ++cells; });
  out << "# vtk DataFile Version 3.0\nokt field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 8 * cells << " double\n";
  for_each_cell(tree, [&](const grid::TreeKey&, const grid::SubGrid& g, int i, int j, int l) {
    const auto c = g.center(i, j, l);
    const double h = 0.5 * g.h();
    for (int v = 0; v < 8; ++v)
      out << c[0] + ((v & 1) ? h : -h) << ' ' << c[1] + ((v & 2) ? h : -h) << ' ' << c[2] + ((v & 4) ? h : -h)
          << '\n';
  });
  out << "CELLS " << cells << ' ' << 9 * cells << '\n';
  for (std::size_t c = 0; c < cells; ++c) {
    out << 8;
    for (int v = 0; v < 8; ++v) out << ' ' << 8 * c + v;
    out << '\n';
  }
  out << "CELL_TYPES " << cells << '\n';
  for (std::size_t c = 0; c < cells; ++c) out << "11\n";  // VTK_VOXEL
  out << "CELL_DATA " << cells << '\n';
  for (int f = 0; f < grid::kNumFields; ++f) {
    out << "SCALARS " << grid::field_name(f) << " double 1\nLOOKUP_TABLE default\n";
    for_each_cell(tree, [&](const grid::TreeKey&, const grid::SubGrid& g, int i, int j, int l) {
      out << g.at(f, i, j, l) << '\n';
    });
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for_each_cell(tree, [&](const grid::TreeKey&, const grid::SubGrid& g, int i, int j, int l) {
    out << hydro::to_primitive(g.state(i, j, l), eos).p << '\n';
  });
  out << "VECTORS velocity double\n";
  for_each_cell(tree, [&](const grid::TreeKey&, const grid::SubGrid& g, int i, int j, int l) {
    const auto w = hydro::to_primitive(g.state(i, j, l), eos);
    out << w.v[0] << ' ' << w.v[1] << ' ' << w.v[2] << '\n';
  });
}

void write_stencil_report(const std::string& path, double theta) {
  auto out = open_out(path);
  out << "theta,radius2,stencil_size,near_count,max_offset,all_pairs_rule_size\n";
  std::vector<double> thetas{0.35, 0.5, 0.7};
  if (std::find(thetas.begin(), thetas.end(), theta) == thetas.end()) thetas.push_back(theta);
  for (double th : thetas) {
    fmm::FmmConfig c;
    c.theta = th;
    const auto st = fmm::generate_stencil(c);
    out << th << ',' << st.radius2 << ',' << st.size() << ',' << st.near_count() << ',' << st.max_offset << ','
        << fmm::all_pairs_rule_count(st.radius2) << '\n';
  }
}

void write_stencil_offsets(const std::string& path, double theta) {
  auto out = open_out(path);
  fmm::FmmConfig c;
  c.theta = theta;
  const auto st = fmm::generate_stencil(c);
  out << "dx,dy,dz,norm2,parity_mask,near\n";
  for (const auto& e : st.offsets)
    out << e.d[0] << ',' << e.d[1] << ',' << e.d[2] << ',' << e.norm2 << ',' << static_cast<int>(e.parity_mask)
        << ',' << (e.near ? 1 : 0) << '\n';
}

void write_scaling_csv(const std::string& path, const std::vector<ScalingRow>& rows) {
  auto out = open_out(path);
  out << "localities,workers,subgrids_per_s,speedup\n";
  for (const auto& r : rows) out << r.localities << ',' << r.workers << ',' << r.subgrids_per_s << ',' << r.speedup << '\n';
}

void write_summary_csv(const std::string& path, const RunMetrics& m) {
  auto out = open_out(path);
  out << "key,value\n";
  out << "scenario," << m.scenario << '\n';
  out << "first_step," << m.first_step << '\n';
  out << "steps," << m.steps.size() << '\n';
  out << "final_time," << m.final_time << '\n';
  out << "elapsed_s," << m.elapsed_s << '\n';
  out << "leaf_updates," << m.leaf_updates << '\n';
  out << "subgrids_per_s," << m.subgrids_per_s << '\n';
  out << "stencil_size," << m.stencil_size << '\n';
  out << "localities," << m.config.localities << '\n';
  out << "workers," << m.config.workers << '\n';
  for (int i = 0; i < fmm::kNumKernelClasses; ++i) {
    const auto name = fmm::kernel_class_name(static_cast<fmm::KernelClass>(i));
    out << "pairs_" << name << ',' << m.interactions.pairs[i] << '\n';
    out << "launches_" << name << ',' << m.interactions.launches[i] << '\n';
  }
  if (m.refined_on_restart)
    for (int f = 0; f < grid::kNumFields; ++f)
      out << "refine_change_" << grid::field_name(f) << ',' << m.refine_change[f] << '\n';
}

void write_outputs(const std::string& dir, const RunResult& r) {
  std::filesystem::create_directories(dir);
  const auto& m = r.metrics;
  write_metrics_csv(dir + "/metrics.csv", m);
  write_conservation_csv(dir + "/conservation.csv", m);
  write_parcel_bytes_csv(dir + "/parcel_bytes.csv", m);
  write_stream_counters_csv(dir + "/stream_counters.csv", m);
  write_levels_csv(dir + "/levels.csv", m);
  write_summary_csv(dir + "/summary.csv", m);
  write_stencil_report(dir + "/stencil_report.csv", m.config.theta);
  write_stencil_offsets(dir + "/stencil_offsets.csv", m.config.theta);
  const auto eos = hydro_config(find_scenario(m.scenario), m.config).eos;
  write_field_csv(dir + "/field.csv", r.tree, eos);
  write_field_vtk(dir + "/field.vtk", r.tree, eos);
}

}  // namespace okt::harness
