#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "okt/fmm/interactions.hpp"
#include "okt/grid/octree.hpp"
#include "okt/harness/config.hpp"
#include "okt/hydro/eos.hpp"
#include "okt/parcel/network.hpp"
#include "okt/runtime/stream_pool.hpp"

namespace okt::harness {

struct StepRecord {
  std::uint64_t step = 0;
  double time = 0;
  double dt = 0;
  double wall_s = 0;
  std::uint64_t leaf_updates = 0;
  double subgrids_per_s = 0;
  grid::State totals{};                 // volume-weighted, every field
  double mass_rel = 0;                  // |M - M0| / |M0|
  double energy_rel = 0;                // |E - E0| / |E0|
  std::array<double, 3> momentum_drift{0, 0, 0};  // P - P0
  double momentum_scale = 0;            // sum |S| V at this step
  double gravity_force_rel = 0;         // |sum m g| / sum |m||g|
  double gravity_torque_rel = 0;
  std::uint64_t rho_floors = 0, p_floors = 0;
};

struct RunMetrics {
  std::string scenario;
  RunConfig config;
  std::uint64_t first_step = 0;  // restored step index
  std::vector<StepRecord> steps;
  double elapsed_s = 0;          // stepping wall time
  std::uint64_t leaf_updates = 0;
  double subgrids_per_s = 0;     // leaf_updates / elapsed
  std::vector<std::size_t> level_nodes;
  std::vector<std::size_t> level_leaves;
  std::vector<std::size_t> leaves_per_locality;
  std::vector<int> workers_per_locality;
  parcel::ByteCounters bytes;
  double simulated_network_us = 0;
  std::vector<std::map<std::string, runtime::KernelCounters>> streams;
  fmm::InteractionCounters interactions;
  std::size_t stencil_size = 0;
  double final_time = 0;
  // refine-on-restart: relative change of each field total
  bool refined_on_restart = false;
  grid::State refine_change{};
};

struct RunResult {
  RunMetrics metrics;
  grid::Octree tree;  // final state
};

// Builds (or restores) the tree, partitions it across the localities and
// steps it; writes outputs when cfg.output is set.
RunResult run(const RunConfig& cfg);

// Bitwise comparison of topology and leaf interiors.
bool same_state(const grid::Octree& a, const grid::Octree& b);

struct ScalingRow {
  int localities = 0;
  int workers = 0;
  double subgrids_per_s = 0;
  double speedup = 0;  // against the first row
};
std::vector<ScalingRow> scaling_sweep(const RunConfig& base, const std::vector<int>& localities,
                                      const std::vector<int>& workers);

// CSV/VTK emission.
void write_metrics_csv(const std::string& path, const RunMetrics& m);
void write_conservation_csv(const std::string& path, const RunMetrics& m);
void write_parcel_bytes_csv(const std::string& path, const RunMetrics& m);
void write_stream_counters_csv(const std::string& path, const RunMetrics& m);
void write_levels_csv(const std::string& path, const RunMetrics& m);
void write_field_csv(const std::string& path, const grid::Octree& tree, const hydro::EosParams& eos);
void write_field_vtk(const std::string& path, const grid::Octree& tree, const hydro::EosParams& eos);
void write_stencil_report(const std::string& path, double theta);
void write_stencil_offsets(const std::string& path, double theta);
void write_summary_csv(const std::string& path, const RunMetrics& m);
void write_scaling_csv(const std::string& path, const std::vector<ScalingRow>& rows);
void write_outputs(const std::string& dir, const RunResult& r);

}  // namespace okt::harness
