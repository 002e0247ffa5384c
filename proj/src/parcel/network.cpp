#include "okt/parcel/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace okt::parcel {

namespace {

constexpr std::uint8_t kStatusOk = 0;
constexpr std::uint8_t kStatusError = 1;
constexpr std::size_t kMaxBatch = 256;

}  // namespace

std::string to_string(Backend b) { return b == Backend::TwoSided ? "twosided" : "onesided"; }

Backend backend_from_string(const std::string& s) {
  if (s == "twosided" || s == "two-sided" || s == "mpi") return Backend::TwoSided;
  if (s == "onesided" || s == "one-sided" || s == "rma") return Backend::OneSided;
  throw std::invalid_argument("unknown parcelport: " + s);
}

Network::Network(int localities, NetworkConfig config) : config_(config) {
  if (localities < 1 || localities > 65535) throw std::invalid_argument("locality count out of range");
  if (config_.bandwidth <= 0) throw std::invalid_argument("bandwidth must be positive");
  if (config_.queue_depth == 0) throw std::invalid_argument("queue depth must be positive");
  for (int i = 0; i < localities; ++i) endpoints_.push_back(std::make_unique<Endpoint>());
}

Network::~Network() = default;

Network::Endpoint& Network::endpoint(int loc) {
  if (loc < 0 || loc >= localities()) throw std::out_of_range("locality " + std::to_string(loc) + " out of range");
  return *endpoints_[loc];
}

const Network::Endpoint& Network::endpoint(int loc) const {
  if (loc < 0 || loc >= localities()) throw std::out_of_range("locality " + std::to_string(loc) + " out of range");
  return *endpoints_[loc];
}

void Network::attach_executor(int loc, runtime::Executor* exec) {
  auto& ep = endpoint(loc);
  std::lock_guard lk(ep.mutex);
  ep.exec = exec;
}

std::uint32_t Network::action_id(std::string_view name) {
  std::uint32_t h = 2166136261u;
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 16777619u;
  }
  return h == 0 ? 1 : h;  // 0 is reserved for replies and acks
}

std::uint32_t Network::register_action(int loc, const std::string& name, Handler handler) {
  const auto id = action_id(name);
  auto& ep = endpoint(loc);
  std::lock_guard lk(ep.mutex);
  auto it = ep.actions.find(id);
  if (it != ep.actions.end() && it->second.first != name)
    throw std::logic_error("action id collision between " + it->second.first + " and " + name);
  ep.actions[id] = {name, std::move(handler)};
  return id;
}

std::uint32_t Network::register_action_everywhere(const std::string& name, const Handler& handler) {
  std::uint32_t id = 0;
  for (int loc = 0; loc < localities(); ++loc) id = register_action(loc, name, handler);
  return id;
}

runtime::Future<Bytes> Network::send_action(int src, int dest, std::uint32_t action, Bytes args) {
  auto& sender = endpoint(src);
  if (dest < 0 || dest >= localities()) {
    return runtime::make_exceptional_future<Bytes>(
        std::make_exception_ptr(std::out_of_range("destination locality " + std::to_string(dest) + " out of range")),
        sender.exec);
  }
  const auto corr = next_correlation_.fetch_add(1);
  runtime::Future<Bytes> f;
  {
    std::lock_guard lk(sender.mutex);
    runtime::Promise<Bytes> p(sender.exec, "parcel action " + std::to_string(action) + " " + std::to_string(src) +
                                               "->" + std::to_string(dest));
    f = p.get_future();
    sender.pending.emplace(corr, std::move(p));
  }
  Parcel parcel;
  parcel.header.source = static_cast<std::uint16_t>(src);
  parcel.header.dest = static_cast<std::uint16_t>(dest);
  parcel.header.action = action;
  parcel.correlation = corr;
  parcel.payload = std::move(args);
  parcel.header.payload_length = parcel.payload.size();
  if (src == dest) {
    Envelope env;
    env.loopback = true;
    env.parcel = std::move(parcel);
    {
      std::lock_guard lk(counters_mutex_);
      ++counters_.loopback_messages;
    }
    enqueue(dest, std::move(env));
  } else {
    transmit(std::move(parcel));
  }
  return f;
}

void Network::count(const Parcel& p, std::size_t wire_size, std::size_t payload_len) {
  std::lock_guard lk(counters_mutex_);
  ++counters_.messages;
  counters_.header_bytes += kHeaderBytes + kCorrelationBytes + p.descriptors.size() * kDescriptorBytes;
  if (!p.rendezvous()) counters_.eager_bytes += payload_len;
  if (p.rendezvous()) ++counters_.rendezvous_messages;
  counters_.matching_path_bytes += wire_size;
}

void Network::transmit(Parcel p) {
  const int src = p.header.source;
  const int dest = p.header.dest;
  const std::size_t payload_len = p.payload.size();
  const bool rendezvous = config_.backend == Backend::OneSided && payload_len > config_.eager_threshold;
  if (rendezvous) {
    const auto region = endpoint(src).registry.register_region(std::move(p.payload));
    p.payload.clear();
    p.header.flags |= kRendezvous;
    p.descriptors = {Descriptor{region, payload_len}};
  }
  p.header.payload_length = payload_len;
  Envelope env;
  env.wire = encode(p);
  count(p, env.wire.size(), payload_len);
  {
    std::lock_guard lk(sim_mutex_);
    auto& s = *endpoints_[src];
    const double xfer = static_cast<double>(env.wire.size()) / config_.bandwidth;
    const double start = std::max(s.nic_free, s.engine_free);
    s.nic_free = start + xfer;
    env.arrival_us = start + config_.latency_us + xfer;
    sim_end_ = std::max(sim_end_, env.arrival_us);
  }
  enqueue(dest, std::move(env));
}

void Network::enqueue(int dest, Envelope env) {
  auto& ep = endpoint(dest);
  in_flight_.fetch_add(1);
  std::lock_guard lk(ep.mutex);
  const bool bounded = !env.loopback && config_.backend == Backend::TwoSided;
  if (bounded && (!ep.backlog.empty() || ep.inbox.size() >= config_.queue_depth)) {
    ep.backlog.push_back(std::move(env));
    std::lock_guard clk(counters_mutex_);
    ++counters_.backpressure_events;
    return;
  }
  ep.inbox.push_back(std::move(env));
}

std::size_t Network::progress(int loc) {
  auto& ep = endpoint(loc);
  std::size_t handled = 0;
  while (handled < kMaxBatch) {
    Envelope env;
    {
      std::lock_guard lk(ep.mutex);
      while (!ep.backlog.empty() && ep.inbox.size() < config_.queue_depth) {
        ep.inbox.push_back(std::move(ep.backlog.front()));
        ep.backlog.pop_front();
      }
      if (ep.inbox.empty()) break;
      env = std::move(ep.inbox.front());
      ep.inbox.pop_front();
    }
    handle(loc, std::move(env));
    in_flight_.fetch_sub(1);
    ++handled;
  }
  return handled;
}

runtime::ProgressHook Network::progress_hook(int loc) {
  return runtime::ProgressHook{[this, loc] { return progress(loc); }, [this] { return busy(); }};
}

void Network::handle(int loc, Envelope env) {
  auto& ep = endpoint(loc);
  Parcel p;
  if (env.loopback) {
    p = std::move(env.parcel);
  } else {
    p = decode(env.wire);
  }
  const int source = p.header.source;

  double engine_done = 0.0;
  if (!env.loopback) {
    std::lock_guard lk(sim_mutex_);
    const double inline_bytes = static_cast<double>(env.wire.size());
    const double start = std::max(ep.engine_free, env.arrival_us);
    if (config_.backend == Backend::TwoSided) {
      engine_done = start + config_.match_overhead_us + inline_bytes / config_.bandwidth;
    } else {
      engine_done = start + config_.completion_overhead_us;
    }
    ep.engine_free = engine_done;
    sim_end_ = std::max(sim_end_, engine_done);
  }

  Bytes payload;
  std::exception_ptr transfer_error;
  if (p.rendezvous()) {
    Writer ack;
    try {
      for (const auto& d : p.descriptors) {
        const auto landing = ep.registry.register_landing(d.length);
        endpoint(source).registry.get(d.region, ep.registry, landing);
        Bytes piece = ep.registry.take(landing);
        payload.insert(payload.end(), piece.begin(), piece.end());
        ack.put<std::uint64_t>(d.region);
        {
          std::lock_guard lk(counters_mutex_);
          counters_.rma_bytes += d.length;
        }
        std::lock_guard lk(sim_mutex_);
        const double start = std::max(engine_done, ep.nic_free);
        const double xfer = static_cast<double>(d.length) / config_.bandwidth;
        ep.nic_free = start + xfer;
        const double got = start + config_.latency_us + xfer + config_.completion_overhead_us;
        ep.engine_free = std::max(ep.engine_free, got);
        sim_end_ = std::max(sim_end_, got);
      }
    } catch (...) {
      transfer_error = std::current_exception();
    }
    if (ack.size() != 0) {
      Parcel a;
      a.header.source = static_cast<std::uint16_t>(loc);
      a.header.dest = static_cast<std::uint16_t>(source);
      a.header.flags = kAck;
      a.correlation = p.correlation;
      a.payload = std::move(ack).take();
      transmit(std::move(a));
    }
  } else {
    payload = std::move(p.payload);
  }

  if ((p.header.flags & kAck) != 0) {
    Reader r(payload);
    while (!r.done()) {
      const auto region = r.get<std::uint64_t>();
      ep.registry.mark_complete(region);
      ep.registry.release(region);
    }
    return;
  }

  if ((p.header.flags & kReply) != 0) {
    if (transfer_error) {
      runtime::Promise<Bytes> promise;
      {
        std::lock_guard lk(ep.mutex);
        auto it = ep.pending.find(p.correlation);
        if (it == ep.pending.end()) return;
        promise = std::move(it->second);
        ep.pending.erase(it);
      }
      promise.set_exception(transfer_error);
      return;
    }
    complete_reply(loc, p, std::move(payload));
    return;
  }

  ep.handled.fetch_add(1);
  if (transfer_error) {
    std::string what = "transfer failed";
    try {
      std::rethrow_exception(transfer_error);
    } catch (const std::exception& e) {
      what = e.what();
    }
    Bytes body(what.begin(), what.end());
    reply(loc, p, kStatusError, body);
    return;
  }
  Handler handler;
  {
    std::lock_guard lk(ep.mutex);
    auto it = ep.actions.find(p.header.action);
    if (it != ep.actions.end()) handler = it->second.second;
  }
  if (!handler) {
    const std::string what = "unknown action id " + std::to_string(p.header.action) + " at locality " +
                             std::to_string(loc);
    reply(loc, p, kStatusError, Bytes(what.begin(), what.end()));
    return;
  }
  Bytes result;
  try {
    result = handler(ActionContext{source, loc}, std::move(payload));
  } catch (const std::exception& e) {
    const std::string what = e.what();
    reply(loc, p, kStatusError, Bytes(what.begin(), what.end()));
    return;
  } catch (...) {
    const std::string what = "unknown handler failure";
    reply(loc, p, kStatusError, Bytes(what.begin(), what.end()));
    return;
  }
  reply(loc, p, kStatusOk, result);
}

void Network::reply(int loc, const Parcel& request, std::uint8_t status, const Bytes& body) {
  Parcel r;
  r.header.source = static_cast<std::uint16_t>(loc);
  r.header.dest = request.header.source;
  r.header.action = 0;
  r.header.flags = kReply;
  r.correlation = request.correlation;
  r.payload.reserve(body.size() + 1);
  r.payload.push_back(status);
  r.payload.insert(r.payload.end(), body.begin(), body.end());
  r.header.payload_length = r.payload.size();
  if (r.header.dest == loc) {
    Envelope env;
    env.loopback = true;
    env.parcel = std::move(r);
    enqueue(loc, std::move(env));
  } else {
    transmit(std::move(r));
  }
}

void Network::complete_reply(int loc, const Parcel& p, Bytes payload) {
  auto& ep = endpoint(loc);
  runtime::Promise<Bytes> promise;
  {
    std::lock_guard lk(ep.mutex);
    auto it = ep.pending.find(p.correlation);
    if (it == ep.pending.end()) return;
    promise = std::move(it->second);
    ep.pending.erase(it);
  }
  if (payload.empty()) {
    promise.set_exception(std::make_exception_ptr(SerializationError("empty reply")));
    return;
  }
  if (payload.front() == kStatusOk) {
    payload.erase(payload.begin());
    promise.set_value(std::move(payload));
  } else {
    promise.set_exception(std::make_exception_ptr(RemoteActionError(std::string(payload.begin() + 1, payload.end()))));
  }
}

ByteCounters Network::counters() const {
  std::lock_guard lk(counters_mutex_);
  return counters_;
}

void Network::reset_counters() {
  std::lock_guard lk(counters_mutex_);
  counters_ = ByteCounters{};
}

double Network::simulated_time_us() const {
  std::lock_guard lk(sim_mutex_);
  return sim_end_;
}

void Network::reset_simulated_time() {
  std::lock_guard lk(sim_mutex_);
  sim_end_ = 0.0;
  for (auto& ep : endpoints_) {
    ep->nic_free = 0.0;
    ep->engine_free = 0.0;
  }
}

}  // namespace okt::parcel
