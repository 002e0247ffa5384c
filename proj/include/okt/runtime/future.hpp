#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "okt/runtime/unique_task.hpp"

namespace okt::runtime {

// Value type for futures that carry no payload.
struct Unit {
  friend bool operator==(Unit, Unit) { return true; }
};

class StateBase;

class Executor {
 public:
  virtual ~Executor() = default;
  virtual void post(UniqueTask task) = 0;
  // Bookkeeping hooks used by the deadlock detector: a state that has
  // continuations attached but is not ready yet.
  virtual void on_waiting(const StateBase* /*state*/, const std::string& /*origin*/) {}
  virtual void on_ready(const StateBase* /*state*/) {}
};

class FutureError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class BrokenPromise : public std::runtime_error {
 public:
  explicit BrokenPromise(const std::string& origin)
      : std::runtime_error("broken promise" + (origin.empty() ? std::string() : ": " + origin)) {}
};

namespace detail {

// Installed by scheduler workers: lets a blocking wait keep executing tasks
// instead of parking the worker.
class WaitHelper {
 public:
  virtual ~WaitHelper() = default;
  virtual bool run_one() = 0;
};

inline WaitHelper*& current_wait_helper() {
  thread_local WaitHelper* helper = nullptr;
  return helper;
}

}  // namespace detail

class StateBase {
 public:
  StateBase(Executor* exec, std::string origin) : exec_(exec), origin_(std::move(origin)) {}
  StateBase(const StateBase&) = delete;
  StateBase& operator=(const StateBase&) = delete;
  virtual ~StateBase() = default;

  bool ready() const {
    std::lock_guard lk(mutex_);
    return ready_;
  }

  bool has_error() const {
    std::lock_guard lk(mutex_);
    return ready_ && error_ != nullptr;
  }

  std::exception_ptr error() const {
    std::lock_guard lk(mutex_);
    return error_;
  }

  void wait() const {
    auto* helper = detail::current_wait_helper();
    std::unique_lock lk(mutex_);
    while (!ready_) {
      if (helper != nullptr) {
        lk.unlock();
        const bool ran = helper->run_one();
        lk.lock();
        if (!ran && !ready_) cv_.wait_for(lk, std::chrono::microseconds(200));
      } else {
        cv_.wait(lk);
      }
    }
  }

  template <class Rep, class Period>
  bool wait_for(std::chrono::duration<Rep, Period> timeout) const {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    auto* helper = detail::current_wait_helper();
    std::unique_lock lk(mutex_);
    while (!ready_) {
      if (std::chrono::steady_clock::now() >= deadline) return false;
      if (helper != nullptr) {
        lk.unlock();
        const bool ran = helper->run_one();
        lk.lock();
        if (!ran && !ready_) cv_.wait_for(lk, std::chrono::microseconds(200));
      } else {
        cv_.wait_until(lk, deadline);
      }
    }
    return true;
  }

  Executor* executor() const noexcept { return exec_; }
  const std::string& origin() const noexcept { return origin_; }

  void add_continuation(UniqueTask task) {
    std::unique_lock lk(mutex_);
    if (!ready_) {
      continuations_.push_back(std::move(task));
      if (!registered_waiting_ && exec_ != nullptr) {
        registered_waiting_ = true;
        lk.unlock();
        exec_->on_waiting(this, origin_);
      }
      return;
    }
    lk.unlock();
    dispatch(std::move(task));
  }

 protected:
  // Caller has stored the value or error under `lk`.
  void publish(std::unique_lock<std::mutex>& lk) {
    ready_ = true;
    auto conts = std::move(continuations_);
    continuations_.clear();
    const bool was_registered = registered_waiting_;
    registered_waiting_ = false;
    lk.unlock();
    cv_.notify_all();
    if (was_registered && exec_ != nullptr) exec_->on_ready(this);
    for (auto& c : conts) dispatch(std::move(c));
  }

  void dispatch(UniqueTask task) {
    if (exec_ != nullptr) {
      exec_->post(std::move(task));
    } else {
      task();
    }
  }

  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  bool ready_ = false;
  bool registered_waiting_ = false;
  std::exception_ptr error_;
  std::vector<UniqueTask> continuations_;
  Executor* exec_;
  std::string origin_;
};

template <class T>
class SharedState final : public StateBase {
 public:
  using StateBase::StateBase;

  void set_value(T value) {
    std::unique_lock lk(mutex_);
    if (ready_) throw FutureError("promise already satisfied: " + origin_);
    value_.emplace(std::move(value));
    publish(lk);
  }

  void set_exception(std::exception_ptr ep) {
    std::unique_lock lk(mutex_);
    if (ready_) throw FutureError("promise already satisfied: " + origin_);
    error_ = std::move(ep);
    publish(lk);
  }

  bool try_set_exception(std::exception_ptr ep) {
    std::unique_lock lk(mutex_);
    if (ready_) return false;
    error_ = std::move(ep);
    publish(lk);
    return true;
  }

  // Precondition: ready and no error.
  T take() {
    std::lock_guard lk(mutex_);
    if (!value_) throw FutureError("future value already retrieved: " + origin_);
    T out = std::move(*value_);
    value_.reset();
    return out;
  }

 private:
  std::optional<T> value_;
};

template <class T>
class Future;
template <class T>
class Promise;

namespace detail {

template <class T>
struct is_future : std::false_type {};
template <class T>
struct is_future<Future<T>> : std::true_type {};

template <class T>
struct unwrap_future {
  using type = T;
};
template <class T>
struct unwrap_future<Future<T>> {
  using type = T;
};

template <class F, class T>
decltype(auto) invoke_with_value(F& f, T&& value) {
  if constexpr (std::is_invocable_v<F&, T&&>) {
    return f(std::forward<T>(value));
  } else {
    static_assert(std::is_same_v<std::decay_t<T>, Unit> && std::is_invocable_v<F&>,
                  "continuation must accept the future's value type");
    return f();
  }
}

template <class F, class T>
using continuation_result_t =
    decltype(invoke_with_value(std::declval<F&>(), std::declval<T&&>()));

template <class R>
using value_of_t = std::conditional_t<std::is_void_v<R>, Unit, typename unwrap_future<R>::type>;

}  // namespace detail

template <class T>
class Future {
 public:
  using value_type = T;

  Future() = default;
  explicit Future(std::shared_ptr<SharedState<T>> state) : state_(std::move(state)) {}
  Future(Future&&) noexcept = default;
  Future& operator=(Future&&) noexcept = default;
  Future(const Future&) = delete;
  Future& operator=(const Future&) = delete;

  bool valid() const noexcept { return static_cast<bool>(state_); }
  bool is_ready() const { return require().ready(); }
  bool has_error() const { return require().has_error(); }
  void wait() const { require().wait(); }

  template <class Rep, class Period>
  bool wait_for(std::chrono::duration<Rep, Period> timeout) const {
    return require().wait_for(timeout);
  }

  const std::string& origin() const { return require().origin(); }
  Executor* executor() const { return require().executor(); }

  // Blocks (helping on scheduler workers), then moves the value out.
  T get() {
    auto state = std::move(state_);
    if (!state) throw FutureError("get() on an invalid future");
    state->wait();
    if (auto ep = state->error()) std::rethrow_exception(ep);
    return state->take();
  }

  // The continuation receives the value; an errored input skips it and
  // forwards the error to the returned future.
  template <class F>
  auto then(F&& fn) && {
    using R = detail::continuation_result_t<std::decay_t<F>, T>;
    using V = detail::value_of_t<R>;
    auto state = std::move(state_);
    if (!state) throw FutureError("then() on an invalid future");
    Promise<V> promise(state->executor(), state->origin());
    Future<V> out = promise.get_future();
    state->add_continuation(
        [state, promise = std::move(promise), fn = std::forward<F>(fn)]() mutable {
          if (auto ep = state->error()) {
            promise.set_exception(ep);
            return;
          }
          try {
            if constexpr (std::is_void_v<R>) {
              detail::invoke_with_value(fn, state->take());
              promise.set_value(Unit{});
            } else if constexpr (detail::is_future<R>::value) {
              auto inner = detail::invoke_with_value(fn, state->take());
              forward_into(std::move(inner), std::move(promise));
            } else {
              promise.set_value(detail::invoke_with_value(fn, state->take()));
            }
          } catch (...) {
            promise.set_exception(std::current_exception());
          }
        });
    return out;
  }

  std::shared_ptr<SharedState<T>> release_state() && { return std::move(state_); }

 private:
  const SharedState<T>& require() const {
    if (!state_) throw FutureError("operation on an invalid future");
    return *state_;
  }

  template <class U>
  static void forward_into(Future<U> inner, Promise<U> promise);

  std::shared_ptr<SharedState<T>> state_;
};

template <class T>
class Promise {
 public:
  explicit Promise(Executor* exec = nullptr, std::string origin = {})
      : state_(std::make_shared<SharedState<T>>(exec, std::move(origin))) {}
  Promise(Promise&&) noexcept = default;
  Promise& operator=(Promise&& other) noexcept {
    if (this != &other) {
      abandon();
      state_ = std::move(other.state_);
      retrieved_ = other.retrieved_;
    }
    return *this;
  }
  Promise(const Promise&) = delete;
  Promise& operator=(const Promise&) = delete;
  ~Promise() { abandon(); }

  Future<T> get_future() {
    if (!state_) throw FutureError("promise has no state");
    if (retrieved_) throw FutureError("future already retrieved");
    retrieved_ = true;
    return Future<T>(state_);
  }

  void set_value(T value) {
    if (!state_) throw FutureError("promise has no state");
    state_->set_value(std::move(value));
  }

  void set_exception(std::exception_ptr ep) {
    if (!state_) throw FutureError("promise has no state");
    state_->set_exception(std::move(ep));
  }

 private:
  void abandon() noexcept {
    if (state_ && !state_->ready()) {
      try {
        state_->try_set_exception(std::make_exception_ptr(BrokenPromise(state_->origin())));
      } catch (...) {
      }
    }
  }

  std::shared_ptr<SharedState<T>> state_;
  bool retrieved_ = false;
};

template <class T>
template <class U>
void Future<T>::forward_into(Future<U> inner, Promise<U> promise) {
  auto inner_state = std::move(inner).release_state();
  if (!inner_state) {
    promise.set_exception(std::make_exception_ptr(FutureError("continuation returned an invalid future")));
    return;
  }
  auto* raw = inner_state.get();
  raw->add_continuation([inner_state, promise = std::move(promise)]() mutable {
    if (auto ep = inner_state->error()) {
      promise.set_exception(ep);
    } else {
      promise.set_value(inner_state->take());
    }
  });
}

template <class T>
Future<std::decay_t<T>> make_ready_future(T&& value, Executor* exec = nullptr) {
  Promise<std::decay_t<T>> p(exec);
  auto f = p.get_future();
  p.set_value(std::forward<T>(value));
  return f;
}

inline Future<Unit> make_ready_future(Executor* exec = nullptr) {
  return make_ready_future(Unit{}, exec);
}

template <class T>
Future<T> make_exceptional_future(std::exception_ptr ep, Executor* exec = nullptr) {
  Promise<T> p(exec);
  auto f = p.get_future();
  p.set_exception(std::move(ep));
  return f;
}

// Schedules `fn` on `exec`; exceptions become an errored future.
template <class F>
auto async(Executor& exec, F&& fn, std::string origin = {}) {
  using R = std::invoke_result_t<std::decay_t<F>&>;
  using V = std::conditional_t<std::is_void_v<R>, Unit, R>;
  Promise<V> promise(&exec, std::move(origin));
  auto out = promise.get_future();
  exec.post([promise = std::move(promise), fn = std::forward<F>(fn)]() mutable {
    try {
      if constexpr (std::is_void_v<R>) {
        fn();
        promise.set_value(Unit{});
      } else {
        promise.set_value(fn());
      }
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  });
  return out;
}

// Ready when every input is ready; the first error (by input order) wins.
template <class T>
Future<std::vector<T>> when_all(std::vector<Future<T>> inputs, Executor* exec = nullptr) {
  if (exec == nullptr && !inputs.empty()) exec = inputs.front().executor();
  if (inputs.empty()) return make_ready_future(std::vector<T>{}, exec);

  struct Gather {
    std::mutex mutex;
    std::vector<std::optional<T>> values;
    std::vector<std::exception_ptr> errors;
    std::size_t remaining;
    Promise<std::vector<T>> promise;
    Gather(std::size_t n, Executor* e) : values(n), errors(n), remaining(n), promise(e, "when_all") {}
  };
  auto gather = std::make_shared<Gather>(inputs.size(), exec);
  auto out = gather->promise.get_future();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto state = std::move(inputs[i]).release_state();
    if (!state) throw FutureError("when_all() on an invalid future");
    auto* raw = state.get();
    raw->add_continuation([gather, state, i]() {
      std::unique_lock lk(gather->mutex);
      if (auto ep = state->error()) {
        gather->errors[i] = ep;
      } else {
        gather->values[i].emplace(state->take());
      }
      if (--gather->remaining != 0) return;
      lk.unlock();
      for (auto& ep : gather->errors) {
        if (ep) {
          gather->promise.set_exception(ep);
          return;
        }
      }
      std::vector<T> values;
      values.reserve(gather->values.size());
      for (auto& v : gather->values) values.push_back(std::move(*v));
      gather->promise.set_value(std::move(values));
    });
  }
  return out;
}

}  // namespace okt::runtime
