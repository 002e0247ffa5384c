#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "okt/fmm/solver.hpp"
#include "okt/fmm/stencil.hpp"
#include "okt/grid/octree.hpp"
#include "okt/hydro/advance.hpp"
#include "okt/parcel/network.hpp"
#include "okt/runtime/stream_pool.hpp"

namespace okt::harness {

struct HaloTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClusterConfig {
  int localities = 1;
  int workers = 1;  // split evenly; every locality gets at least one
  int streams = 128;
  int streams_per_worker = 0;
  parcel::NetworkConfig network;
  hydro::HydroConfig hydro;
  bool hydro_enabled = true;
  bool gravity = false;
  fmm::FmmConfig fmm;
  double timeout_s = 120;
  std::uint64_t seed = 1;
};

struct StepResult {
  double dt = 0;
  std::uint64_t leaf_updates = 0;
  hydro::FloorCounts floors;
  fmm::InteractionCounters interactions;
};

// Per-leaf diagnostics reported by the owning locality.
struct LeafReport {
  grid::State totals{};
  double momentum_abs = 0;             // sum |S| V
  fmm::ConservationResiduals gravity;  // of the most recent gravity solve
};

class Locality;

// Simulated localities: each owns a share of the leaves, its own scheduler,
// stream pool and parcel endpoint. Data moves between them only as parcels.
class Cluster {
 public:
  Cluster(const grid::Octree& tree, ClusterConfig cfg);
  ~Cluster();
  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  int localities() const noexcept { return static_cast<int>(locs_.size()); }
  const ClusterConfig& config() const noexcept { return cfg_; }
  const std::vector<std::size_t>& leaves_per_locality() const noexcept { return leaves_per_loc_; }
  std::vector<int> workers_per_locality() const;

  // Global CFL step, reduced over localities by message exchange.
  double cfl_dt();
  // One SSP-RK2 step, or one gravity solve when hydro is disabled.
  StepResult step(double dt);
  // Gravity of the current state on every leaf.
  fmm::GravityField gravity();

  // A copy of the distributed state with interiors restricted.
  grid::Octree gather() const;
  std::map<grid::TreeKey, LeafReport> reports() const;

  parcel::ByteCounters bytes() const { return net_->counters(); }
  double simulated_time_us() const { return net_->simulated_time_us(); }
  // Per locality, per kernel class.
  std::vector<std::map<std::string, runtime::KernelCounters>> stream_counters() const;
  const fmm::Stencil& stencil() const noexcept { return stencil_; }

 private:
  template <class T>
  std::vector<T> collect(std::vector<runtime::Future<T>> fs, const std::string& what);

  ClusterConfig cfg_;
  grid::Octree layout_;  // topology and ownership; data unused
  fmm::Stencil stencil_;
  std::unique_ptr<parcel::Network> net_;
  std::vector<std::unique_ptr<Locality>> locs_;
  std::vector<std::size_t> leaves_per_loc_;
};

}  // namespace okt::harness
