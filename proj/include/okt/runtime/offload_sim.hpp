#pragma once

#include <cstdint>

#include "okt/runtime/stream_pool.hpp"

namespace okt::runtime {

// Discrete-event model of the stream-pool policy: W workers share one device
// with a limited number of concurrently executing kernels; each worker owns
// streams_per_worker slots and falls back to running a kernel itself when all
// of them are occupied.
struct OffloadSimConfig {
  int workers = 2;
  int slots = 128;
  int streams_per_worker = 0;  // 0 selects slots / workers
  int device_lanes = 4;
  std::uint64_t kernels = 20000;   // total, split evenly over workers
  double kernel_work = 100.0;      // mean work units per kernel (exponential)
  double cpu_work = 10.0;          // work units between submissions
  double submit_overhead_us = 1.0;
  StreamCostModel cost;
  std::uint64_t seed = 7;
};

struct OffloadSimResult {
  std::uint64_t offloaded = 0;
  std::uint64_t ran_local = 0;
  double makespan_us = 0.0;
  double fraction() const {
    const auto total = offloaded + ran_local;
    return total == 0 ? 0.0 : static_cast<double>(offloaded) / static_cast<double>(total);
  }
};

OffloadSimResult simulate_offload(const OffloadSimConfig& config);

}  // namespace okt::runtime
