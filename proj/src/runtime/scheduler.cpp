#include "okt/runtime/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <random>

namespace okt::runtime {

namespace {

thread_local Scheduler* tls_scheduler = nullptr;
thread_local int tls_worker = -1;

constexpr auto kIdleWait = std::chrono::microseconds(200);

}  // namespace

class Scheduler::Helper final : public detail::WaitHelper {
 public:
  Helper(Scheduler* s, int id) : sched_(s), id_(id) {}
  bool run_one() override { return sched_->try_run_one(id_) || sched_->poll_hooks() > 0; }

 private:
  Scheduler* sched_;
  int id_;
};

Scheduler::Scheduler(int workers, std::uint64_t seed) : executed_(std::max(workers, 1)), seed_(seed) {
  if (workers < 1) throw std::invalid_argument("scheduler needs at least one worker");
  for (int i = 0; i < workers; ++i) queues_.push_back(std::make_unique<Queue>());
  for (auto& e : executed_) e.store(0);
  threads_.reserve(workers);
  for (int i = 0; i < workers; ++i) threads_.emplace_back([this, i] { worker_loop(i); });
}

Scheduler::~Scheduler() {
  stop_.store(true);
  idle_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

Scheduler* Scheduler::current() noexcept { return tls_scheduler; }

int Scheduler::current_worker() const noexcept { return tls_scheduler == this ? tls_worker : -1; }

void Scheduler::post(UniqueTask task) {
  pending_.fetch_add(1);
  int target = current_worker();
  if (target < 0) target = static_cast<int>(round_robin_.fetch_add(1) % queues_.size());
  {
    std::lock_guard lk(queues_[target]->mutex);
    queues_[target]->tasks.push_back(std::move(task));
  }
  idle_cv_.notify_one();
}

void Scheduler::on_waiting(const StateBase* state, const std::string& origin) {
  std::lock_guard lk(registry_mutex_);
  waiting_.emplace(state, origin);
}

void Scheduler::on_ready(const StateBase* state) {
  std::lock_guard lk(registry_mutex_);
  waiting_.erase(state);
}

std::vector<std::string> Scheduler::unready_origins() const {
  std::vector<std::string> out;
  {
    std::lock_guard lk(registry_mutex_);
    out.reserve(waiting_.size());
    for (const auto& [state, origin] : waiting_) out.push_back(origin);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Scheduler::add_progress_hook(ProgressHook hook) {
  std::lock_guard lk(hooks_mutex_);
  hooks_.push_back(std::make_shared<ProgressHook>(std::move(hook)));
}

std::size_t Scheduler::poll_hooks() {
  std::vector<std::shared_ptr<ProgressHook>> hooks;
  {
    std::lock_guard lk(hooks_mutex_);
    hooks = hooks_;
  }
  std::size_t handled = 0;
  for (auto& h : hooks) {
    if (h->poll) handled += h->poll();
  }
  return handled;
}

bool Scheduler::hooks_busy() const {
  std::lock_guard lk(hooks_mutex_);
  for (const auto& h : hooks_) {
    if (h->busy && h->busy()) return true;
  }
  return false;
}

bool Scheduler::pop_local(int id, UniqueTask& out) {
  auto& q = *queues_[id];
  std::lock_guard lk(q.mutex);
  if (q.tasks.empty()) return false;
  out = std::move(q.tasks.back());
  q.tasks.pop_back();
  return true;
}

bool Scheduler::steal(int id, UniqueTask& out) {
  const int n = workers();
  if (n < 2) return false;
  thread_local std::mt19937_64 rng;
  thread_local const Scheduler* seeded_for = nullptr;
  if (seeded_for != this) {
    rng.seed(seed_ + static_cast<std::uint64_t>(id) * 0x632be59bd9b4e019ULL);
    seeded_for = this;
  }
  const int start = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
  for (int k = 0; k < n; ++k) {
    const int victim = (start + k) % n;
    if (victim == id) continue;
    auto& q = *queues_[victim];
    std::lock_guard lk(q.mutex);
    if (q.tasks.empty()) continue;
    out = std::move(q.tasks.front());
    q.tasks.pop_front();
    steals_.fetch_add(1);
    return true;
  }
  return false;
}

void Scheduler::run_task(int id, UniqueTask& task) {
  executed_[id].fetch_add(1);
  try {
    task();
  } catch (...) {
    // Task bodies report failures through their promises; anything escaping
    // here has nowhere to go.
  }
  if (pending_.fetch_sub(1) == 1) {
    std::lock_guard lk(idle_mutex_);
    quiet_cv_.notify_all();
  }
}

bool Scheduler::try_run_one(int id) {
  UniqueTask task;
  if (!pop_local(id, task) && !steal(id, task)) return false;
  run_task(id, task);
  return true;
}

void Scheduler::worker_loop(int id) {
  tls_scheduler = this;
  tls_worker = id;
  Helper helper(this, id);
  detail::current_wait_helper() = &helper;
  while (true) {
    if (try_run_one(id)) continue;
    if (poll_hooks() > 0) continue;
    if (stop_.load()) break;
    std::unique_lock lk(idle_mutex_);
    idle_cv_.wait_for(lk, kIdleWait);
  }
  detail::current_wait_helper() = nullptr;
  tls_scheduler = nullptr;
  tls_worker = -1;
}

bool Scheduler::quiescent() const { return pending_.load() == 0 && !hooks_busy(); }

void Scheduler::wait_quiescent() {
  if (current_worker() >= 0) throw std::logic_error("wait_quiescent() called from a worker");
  int stable = 0;
  while (stable < 2) {
    {
      std::unique_lock lk(idle_mutex_);
      quiet_cv_.wait_for(lk, std::chrono::milliseconds(1), [&] { return pending_.load() == 0; });
    }
    if (pending_.load() != 0 || hooks_busy()) {
      stable = 0;
      continue;
    }
    if (poll_hooks() > 0) {
      stable = 0;
      continue;
    }
    ++stable;
  }
  auto origins = unready_origins();
  if (!origins.empty()) throw DeadlockError(std::move(origins));
}

std::vector<std::uint64_t> Scheduler::tasks_per_worker() const {
  std::vector<std::uint64_t> out;
  out.reserve(executed_.size());
  for (const auto& e : executed_) out.push_back(e.load());
  return out;
}

SchedulerStats run_scheduler(int workers, std::vector<UniqueTask> roots, std::uint64_t seed) {
  Scheduler sched(workers, seed);
  for (auto& t : roots) sched.post(std::move(t));
  sched.wait_quiescent();
  return {sched.tasks_per_worker(), sched.steals()};
}

}  // namespace okt::runtime
