#include "okt/runtime/stream_pool.hpp"

#include <algorithm>
#include <stdexcept>

namespace okt::runtime {

StreamPool::StreamPool(Executor& exec, StreamPoolConfig config)
    : exec_(exec), config_(config), busy_(static_cast<std::size_t>(std::max(config.slots, 0))) {
  if (config_.slots < 0) throw std::invalid_argument("stream pool needs a non-negative slot count");
  if (config_.workers < 1) throw std::invalid_argument("stream pool needs at least one worker");
  per_worker_ = config_.streams_per_worker > 0 ? config_.streams_per_worker
                                                : std::max(1, config_.slots / config_.workers);
  for (auto& b : busy_) b.store(false);
}

int StreamPool::claim_slot() {
  const int n = slots();
  if (n == 0) return -1;
  int begin = 0;
  int end = n;
  auto* sched = Scheduler::current();
  if (sched != nullptr && static_cast<Executor*>(sched) == &exec_) {
    const int w = sched->current_worker() % config_.workers;
    begin = std::min(n, w * per_worker_);
    end = std::min(n, begin + per_worker_);
    if (begin == end) return -1;
  }
  for (int s = begin; s < end; ++s) {
    bool expected = false;
    if (busy_[s].compare_exchange_strong(expected, true)) {
      in_flight_.fetch_add(1);
      return s;
    }
  }
  return -1;
}

void StreamPool::release_slot(int slot) {
  busy_[slot].store(false);
  in_flight_.fetch_sub(1);
}

void StreamPool::record(const std::string& kernel_class, bool offloaded, double work) {
  std::lock_guard lk(counters_mutex_);
  auto& c = counters_[kernel_class];
  const double core_us = work / config_.cost.core_rate;
  if (offloaded) {
    ++c.offloaded;
    c.device_us += config_.cost.launch_us + core_us / config_.cost.device_speedup;
  } else {
    ++c.ran_local;
    c.local_us += core_us;
  }
}

std::map<std::string, KernelCounters> StreamPool::counters() const {
  std::lock_guard lk(counters_mutex_);
  return counters_;
}

KernelCounters StreamPool::totals() const {
  std::lock_guard lk(counters_mutex_);
  KernelCounters t;
  for (const auto& [name, c] : counters_) {
    t.offloaded += c.offloaded;
    t.ran_local += c.ran_local;
    t.device_us += c.device_us;
    t.local_us += c.local_us;
  }
  return t;
}

void StreamPool::reset_counters() {
  std::lock_guard lk(counters_mutex_);
  counters_.clear();
}

}  // namespace okt::runtime
