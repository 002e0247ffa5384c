#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "okt/runtime/errors.hpp"
#include "okt/runtime/future.hpp"
#include "okt/runtime/unique_task.hpp"

namespace okt::runtime {

// Polled by idle workers. `poll` handles pending completions and returns how
// many it handled; `busy` reports work in flight that is not yet a task
// (e.g. parcels on the wire) so quiescence is not declared early.
struct ProgressHook {
  std::function<std::size_t()> poll;
  std::function<bool()> busy;
};

// Work-stealing scheduler: one deque per worker, owner pops from the back,
// thieves take from the front of a uniformly random victim.
class Scheduler final : public Executor {
 public:
  explicit Scheduler(int workers, std::uint64_t seed = 0x9e3779b97f4a7c15ULL);
  ~Scheduler() override;
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  void post(UniqueTask task) override;
  void on_waiting(const StateBase* state, const std::string& origin) override;
  void on_ready(const StateBase* state) override;

  void add_progress_hook(ProgressHook hook);

  // Blocks the calling (non-worker) thread until no task is queued or
  // running and no hook is busy. Throws DeadlockError if futures with
  // attached continuations are still unready at that point.
  void wait_quiescent();

  // True when nothing is queued, running or in flight.
  bool quiescent() const;

  int workers() const noexcept { return static_cast<int>(queues_.size()); }
  std::vector<std::uint64_t> tasks_per_worker() const;
  std::uint64_t steals() const noexcept { return steals_.load(); }
  std::vector<std::string> unready_origins() const;

  // Index of the calling worker in this scheduler, or -1.
  int current_worker() const noexcept;
  // Scheduler owning the calling thread, if any.
  static Scheduler* current() noexcept;

 private:
  struct alignas(64) Queue {
    std::mutex mutex;
    std::deque<UniqueTask> tasks;
  };
  class Helper;

  void worker_loop(int id);
  bool try_run_one(int id);
  bool pop_local(int id, UniqueTask& out);
  bool steal(int id, UniqueTask& out);
  std::size_t poll_hooks();
  bool hooks_busy() const;
  void run_task(int id, UniqueTask& task);

  std::vector<std::unique_ptr<Queue>> queues_;
  std::vector<std::thread> threads_;
  std::vector<std::atomic<std::uint64_t>> executed_;
  std::atomic<std::uint64_t> steals_{0};
  std::atomic<std::int64_t> pending_{0};  // queued + running
  std::atomic<std::uint64_t> round_robin_{0};
  std::atomic<bool> stop_{false};
  std::uint64_t seed_;

  mutable std::mutex idle_mutex_;
  std::condition_variable idle_cv_;
  std::condition_variable quiet_cv_;

  mutable std::mutex hooks_mutex_;
  std::vector<std::shared_ptr<ProgressHook>> hooks_;

  mutable std::mutex registry_mutex_;
  std::unordered_map<const StateBase*, std::string> waiting_;
};

struct SchedulerStats {
  std::vector<std::uint64_t> tasks_per_worker;
  std::uint64_t steals = 0;
};

// Runs the root tasks (and everything they spawn) to completion on W workers.
SchedulerStats run_scheduler(int workers, std::vector<UniqueTask> roots, std::uint64_t seed = 1);

}  // namespace okt::runtime
