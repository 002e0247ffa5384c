#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "okt/parcel/rma.hpp"
#include "okt/parcel/serialize.hpp"
#include "okt/parcel/wire.hpp"
#include "okt/runtime/future.hpp"
#include "okt/runtime/scheduler.hpp"

namespace okt::parcel {

enum class Backend { TwoSided, OneSided };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct NetworkConfig {
  Backend backend = Backend::OneSided;
  std::size_t eager_threshold = 4096;
  double latency_us = 1.0;
  double bandwidth = 10000.0;  // bytes per simulated us
  double match_overhead_us = 2.0;
  double completion_overhead_us = 0.5;
  std::size_t queue_depth = 1024;
};

struct ByteCounters {
  std::uint64_t messages = 0;
  std::uint64_t header_bytes = 0;  // fixed header, correlation id, descriptors
  std::uint64_t eager_bytes = 0;   // payload bytes carried inline
  std::uint64_t rma_bytes = 0;     // payload bytes moved by one-sided gets
  std::uint64_t matching_path_bytes = 0;
  std::uint64_t rendezvous_messages = 0;
  std::uint64_t loopback_messages = 0;
  std::uint64_t backpressure_events = 0;
  std::uint64_t total_bytes() const noexcept { return matching_path_bytes + rma_bytes; }
};

struct ActionContext {
  int source = 0;
  int dest = 0;
};

// Runs at the destination during progress(); must not block on futures.
using Handler = std::function<Bytes(const ActionContext&, Bytes)>;

class RemoteActionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// In-process simulated network connecting isolated localities. All traffic
// between localities goes through send_action(); delivery happens when the
// destination calls progress().
class Network {
 public:
  explicit Network(int localities, NetworkConfig config = {});
  ~Network();
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  int localities() const noexcept { return static_cast<int>(endpoints_.size()); }
  const NetworkConfig& config() const noexcept { return config_; }

  // Futures returned to `loc` schedule their continuations on `exec`.
  void attach_executor(int loc, runtime::Executor* exec);

  static std::uint32_t action_id(std::string_view name);
  std::uint32_t register_action(int loc, const std::string& name, Handler handler);
  std::uint32_t register_action_everywhere(const std::string& name, const Handler& handler);

  runtime::Future<Bytes> send_action(int src, int dest, std::uint32_t action, Bytes args);

  // Serializes on the sender; a throwing serializer yields an errored future.
  template <class F>
  runtime::Future<Bytes> send_action_with(int src, int dest, std::uint32_t action, F&& serialize) {
    Writer w;
    try {
      serialize(w);
    } catch (...) {
      return runtime::make_exceptional_future<Bytes>(std::current_exception(), endpoint(src).exec);
    }
    return send_action(src, dest, action, std::move(w).take());
  }

  std::size_t progress(int loc);
  bool busy() const noexcept { return in_flight_.load() > 0; }
  runtime::ProgressHook progress_hook(int loc);

  ByteCounters counters() const;
  void reset_counters();
  double simulated_time_us() const;
  void reset_simulated_time();

  RmaRegistry& registry(int loc) { return endpoint(loc).registry; }
  std::uint64_t handled(int loc) const { return endpoint(loc).handled.load(); }

 private:
  struct Envelope {
    Bytes wire;
    Parcel parcel;  // loopback only
    bool loopback = false;
    double arrival_us = 0.0;
  };
  struct Endpoint {
    std::mutex mutex;
    std::deque<Envelope> inbox;
    std::deque<Envelope> backlog;
    std::unordered_map<std::uint64_t, runtime::Promise<Bytes>> pending;
    std::unordered_map<std::uint32_t, std::pair<std::string, Handler>> actions;
    runtime::Executor* exec = nullptr;
    RmaRegistry registry;
    std::atomic<std::uint64_t> handled{0};
    double nic_free = 0.0;
    double engine_free = 0.0;
  };

  Endpoint& endpoint(int loc);
  const Endpoint& endpoint(int loc) const;
  void transmit(Parcel p);
  void enqueue(int dest, Envelope env);
  void handle(int loc, Envelope env);
  void reply(int loc, const Parcel& request, std::uint8_t status, const Bytes& body);
  void complete_reply(int loc, const Parcel& p, Bytes payload);
  void count(const Parcel& p, std::size_t wire_size, std::size_t payload_len);

  NetworkConfig config_;
  std::vector<std::unique_ptr<Endpoint>> endpoints_;
  std::atomic<std::uint64_t> next_correlation_{1};
  std::atomic<std::int64_t> in_flight_{0};

  mutable std::mutex counters_mutex_;
  ByteCounters counters_;

  mutable std::mutex sim_mutex_;
  double sim_end_ = 0.0;
};

}  // namespace okt::parcel
