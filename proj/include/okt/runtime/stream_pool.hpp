#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "okt/runtime/future.hpp"
#include "okt/runtime/scheduler.hpp"

namespace okt::runtime {

struct StreamCostModel {
  double launch_us = 5.0;      // simulated fixed device launch overhead
  double core_rate = 1.0;      // work units per simulated us on one core
  double device_speedup = 20;  // device rate / core rate
};

struct StreamPoolConfig {
  int slots = 128;
  int workers = 1;
  int streams_per_worker = 0;  // 0 selects slots / workers
  StreamCostModel cost;
};

struct KernelCounters {
  std::uint64_t offloaded = 0;
  std::uint64_t ran_local = 0;
  double device_us = 0.0;  // simulated
  double local_us = 0.0;   // simulated
  double offload_fraction() const {
    const auto total = offloaded + ran_local;
    return total == 0 ? 0.0 : static_cast<double>(offloaded) / static_cast<double>(total);
  }
};

// K stream slots, each holding at most one in-flight simulated device task.
// A submission takes a free slot from the calling worker's share of the pool
// or, if none is free, runs the local implementation inline.
class StreamPool {
 public:
  StreamPool(Executor& exec, StreamPoolConfig config);

  template <class Device, class Local>
  auto submit(const std::string& kernel_class, double work, Device device, Local local)
      -> Future<std::invoke_result_t<Device&>> {
    using R = std::invoke_result_t<Device&>;
    static_assert(std::is_same_v<R, std::invoke_result_t<Local&>>,
                  "device and local paths must return the same type");
    const int slot = claim_slot();
    if (slot < 0) {
      record(kernel_class, false, work);
      Promise<R> p(&exec_, kernel_class + " (local)");
      auto f = p.get_future();
      try {
        p.set_value(local());
      } catch (...) {
        p.set_exception(std::current_exception());
      }
      return f;
    }
    record(kernel_class, true, work);
    Promise<R> p(&exec_, kernel_class + " (stream " + std::to_string(slot) + ")");
    auto f = p.get_future();
    exec_.post([this, slot, p = std::move(p), device = std::move(device)]() mutable {
      try {
        auto value = device();
        release_slot(slot);
        p.set_value(std::move(value));
      } catch (...) {
        release_slot(slot);
        p.set_exception(std::current_exception());
      }
    });
    return f;
  }

  int slots() const noexcept { return static_cast<int>(busy_.size()); }
  int streams_per_worker() const noexcept { return per_worker_; }
  int in_flight() const noexcept { return in_flight_.load(); }
  std::map<std::string, KernelCounters> counters() const;
  KernelCounters totals() const;
  void reset_counters();

 private:
  int claim_slot();
  void release_slot(int slot);
  void record(const std::string& kernel_class, bool offloaded, double work);

  Executor& exec_;
  StreamPoolConfig config_;
  int per_worker_;
  std::vector<std::atomic<bool>> busy_;
  std::atomic<int> in_flight_{0};
  mutable std::mutex counters_mutex_;
  std::map<std::string, KernelCounters> counters_;
};

}  // namespace okt::runtime
