#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>

#include "okt/runtime/errors.hpp"
#include "okt/runtime/future.hpp"

namespace okt::runtime {

// Keyed, step-indexed single-assignment pipe. Receivers may fetch futures for
// any step before or after the matching send; each (key, step) is delivered
// exactly once.
template <class T>
class Channel {
 public:
  explicit Channel(Executor* exec = nullptr) : exec_(exec) {}

  void set_executor(Executor* exec) {
    std::lock_guard lk(mutex_);
    exec_ = exec;
  }

  void register_key(const std::string& key) {
    std::lock_guard lk(mutex_);
    keys_.insert(key);
  }

  bool registered(const std::string& key) const {
    std::lock_guard lk(mutex_);
    return keys_.count(key) != 0;
  }

  Future<T> get_future(const std::string& key, std::uint64_t step) {
    std::lock_guard lk(mutex_);
    auto& slot = slot_for(key, step);
    if (slot.fetched) throw ProtocolError("channel future fetched twice: " + describe(key, step));
    slot.fetched = true;
    auto f = std::move(slot.future);
    if (slot.sent) retire(key, step);
    return f;
  }

  void send(const std::string& key, std::uint64_t step, T payload) {
    Promise<T> promise;
    {
      std::lock_guard lk(mutex_);
      auto& slot = slot_for(key, step);
      if (slot.sent) throw ProtocolError("duplicate channel send: " + describe(key, step));
      slot.sent = true;
      promise = std::move(slot.promise);
      if (slot.fetched) retire(key, step);
    }
    promise.set_value(std::move(payload));
  }

  // (key, step) pairs that have seen a send or a fetch but not both.
  std::size_t outstanding() const {
    std::lock_guard lk(mutex_);
    return slots_.size();
  }

 private:
  struct Slot {
    Slot(Executor* exec, std::string origin) : promise(exec, std::move(origin)), future(promise.get_future()) {}
    Promise<T> promise;
    Future<T> future;
    bool sent = false;
    bool fetched = false;
  };
  using Id = std::pair<std::string, std::uint64_t>;

  static std::string describe(const std::string& key, std::uint64_t step) {
    return key + "@" + std::to_string(step);
  }

  Slot& slot_for(const std::string& key, std::uint64_t step) {
    if (keys_.count(key) == 0) throw ProtocolError("channel key not registered: " + key);
    Id id{key, step};
    if (done_.count(id) != 0) throw ProtocolError("channel slot already consumed: " + describe(key, step));
    auto it = slots_.find(id);
    if (it == slots_.end()) {
      it = slots_.try_emplace(std::move(id), exec_, "channel " + describe(key, step)).first;
    }
    return it->second;
  }

  void retire(const std::string& key, std::uint64_t step) {
    slots_.erase({key, step});
    done_.emplace(key, step);
  }

  Executor* exec_;
  mutable std::mutex mutex_;
  std::set<std::string> keys_;
  std::map<Id, Slot> slots_;
  std::set<Id> done_;
};

}  // namespace okt::runtime
