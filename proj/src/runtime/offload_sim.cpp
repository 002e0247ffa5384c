#include "okt/runtime/offload_sim.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace okt::runtime {

OffloadSimResult simulate_offload(const OffloadSimConfig& c) {
  if (c.workers < 1 || c.slots < 0 || c.device_lanes < 1) throw std::invalid_argument("bad offload simulation config");
  const int per_worker = c.streams_per_worker > 0 ? c.streams_per_worker : std::max(1, c.slots / c.workers);

  std::mt19937_64 rng(c.seed);
  std::exponential_distribution<double> work_dist(1.0 / c.kernel_work);

  std::vector<double> slot_busy_until(static_cast<std::size_t>(c.slots), 0.0);
  std::priority_queue<double, std::vector<double>, std::greater<>> lanes;
  for (int i = 0; i < c.device_lanes; ++i) lanes.push(0.0);

  std::vector<std::uint64_t> remaining(static_cast<std::size_t>(c.workers), c.kernels / c.workers);
  for (std::uint64_t i = 0; i < c.kernels % c.workers; ++i) ++remaining[i];

  using Event = std::pair<double, int>;  // (time, worker)
  std::priority_queue<Event, std::vector<Event>, std::greater<>> ready;
  for (int w = 0; w < c.workers; ++w) ready.emplace(c.cpu_work / c.cost.core_rate, w);

  OffloadSimResult r;
  double finish = 0.0;
  while (!ready.empty()) {
    auto [t, w] = ready.top();
    ready.pop();
    if (remaining[w] == 0) {
      finish = std::max(finish, t);
      continue;
    }
    --remaining[w];
    const double work = work_dist(rng);
    const int begin = std::min(c.slots, w * per_worker);
    const int end = std::min(c.slots, begin + per_worker);
    int slot = -1;
    for (int s = begin; s < end; ++s) {
      if (slot_busy_until[s] <= t) {
        slot = s;
        break;
      }
    }
    double next = t;
    if (slot >= 0) {
      const double lane_free = lanes.top();
      lanes.pop();
      const double start = std::max(t, lane_free);
      const double done = start + c.cost.launch_us + work / (c.cost.core_rate * c.cost.device_speedup);
      lanes.push(done);
      slot_busy_until[slot] = done;
      finish = std::max(finish, done);
      ++r.offloaded;
      next += c.submit_overhead_us;
    } else {
      ++r.ran_local;
      next += work / c.cost.core_rate;
    }
    next += c.cpu_work / c.cost.core_rate;
    ready.emplace(next, w);
  }
  r.makespan_us = finish;
  return r;
}

}  // namespace okt::runtime
