#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <random>
#include <thread>

#include "okt/parcel/network.hpp"
#include "okt/parcel/wire.hpp"
#include "okt/runtime/scheduler.hpp"

using namespace okt::parcel;
using okt::runtime::Future;
using okt::runtime::Scheduler;

namespace {

Bytes pattern(std::size_t n, std::uint8_t salt = 0) {
  Bytes b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>((i * 131 + salt) & 0xff);
  return b;
}

Handler echo() {
  return [](const ActionContext&, Bytes b) { return b; };
}

Handler sink() {
  return [](const ActionContext&, Bytes) { return Bytes{}; };
}

void drain(Network& net) {
  while (net.busy()) {
    for (int l = 0; l < net.localities(); ++l) net.progress(l);
  }
}

constexpr std::uint64_t kFixed = kHeaderBytes + kCorrelationBytes;

}  // namespace

TEST_CASE("wire round trip is bitwise for eager and rendezvous parcels") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    Parcel p;
    p.header.source = static_cast<std::uint16_t>(rng() % 65536);
    p.header.dest = static_cast<std::uint16_t>(rng() % 65536);
    p.header.action = static_cast<std::uint32_t>(rng());
    p.correlation = rng();
    if (rng() % 2 == 0) {
      p.payload = pattern(rng() % 300, static_cast<std::uint8_t>(t));
      p.header.payload_length = p.payload.size();
      p.header.flags = static_cast<std::uint8_t>(rng() % 2) * kReply;
    } else {
      p.header.flags = kRendezvous;
      const int n = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) {
        p.descriptors.push_back({rng(), rng() % 100000});
        p.header.payload_length += p.descriptors.back().length;
      }
    }
    const auto wire = encode(p);
    CHECK(wire.size() == inline_size(p));
    CHECK(decode(wire) == p);
    CHECK(encode(decode(wire)) == wire);
  }
}

TEST_CASE("wire header layout") {
  Parcel p;
  p.header.source = 0x0102;
  p.header.dest = 0x0304;
  p.header.action = 0x05060708;
  p.header.flags = kRendezvous;
  p.header.payload_length = 7;
  p.descriptors = {{9, 7}};
  const auto w = encode(p);
  REQUIRE(w.size() == kHeaderBytes + kCorrelationBytes + kDescriptorBytes);
  CHECK(w[0] == 'O');
  CHECK(w[3] == '1');
  CHECK(w[4] == kWireVersion);
  CHECK(w[5] == 0x02);
  CHECK(w[6] == 0x01);
  CHECK(w[9] == 0x08);
  CHECK(w[13] == kRendezvous);
  CHECK(w[14] == 7);
}

TEST_CASE("decode rejects malformed input") {
  Parcel p;
  p.payload = pattern(10);
  p.header.payload_length = 10;
  auto w = encode(p);
  auto bad_magic = w;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode(bad_magic), SerializationError);
  auto bad_version = w;
  bad_version[4] = 99;
  CHECK_THROWS_AS(decode(bad_version), SerializationError);
  auto truncated = w;
  truncated.resize(w.size() - 3);
  CHECK_THROWS_AS(decode(truncated), SerializationError);
  CHECK_THROWS_AS(decode(Bytes(5)), SerializationError);
}

TEST_CASE("serializer round trip") {
  Writer w;
  w.put<std::uint32_t>(7);
  w.put<double>(-0.25);
  w.put_string("halo");
  w.put_array(std::vector<double>{1.5, 2.5});
  const auto bytes = std::move(w).take();
  Reader r(bytes);
  CHECK(r.get<std::uint32_t>() == 7);
  CHECK(r.get<double>() == -0.25);
  CHECK(r.get_string() == "halo");
  CHECK(r.get_array<double>() == std::vector<double>{1.5, 2.5});
  CHECK(r.done());
  Reader short_reader(std::span<const std::uint8_t>(bytes.data(), 6));
  short_reader.get<std::uint32_t>();
  CHECK_THROWS_AS(short_reader.get<double>(), SerializationError);
}

TEST_CASE("echo action returns the payload") {
  for (auto backend : {Backend::TwoSided, Backend::OneSided}) {
    Network net(2, {.backend = backend});
    const auto id = net.register_action_everywhere("echo", echo());
    for (std::size_t n : {0u, 100u, 5000u, 100000u}) {
      auto f = net.send_action(0, 1, id, pattern(n));
      drain(net);
      REQUIRE(f.is_ready());
      CHECK(f.get() == pattern(n));
    }
    CHECK(net.registry(0).registered_count() == 0);
    CHECK(net.registry(1).registered_count() == 0);
  }
}

TEST_CASE("loopback sends count no network bytes") {
  Network net(2);
  const auto id = net.register_action_everywhere("echo", echo());
  auto f = net.send_action(1, 1, id, pattern(100000));
  CHECK(net.progress(1) == 2);  // request and reply
  CHECK(f.get() == pattern(100000));
  const auto c = net.counters();
  CHECK(c.messages == 0);
  CHECK(c.total_bytes() == 0);
  CHECK(c.loopback_messages == 1);
}

TEST_CASE("two-sided accounting charges header and payload on the matching path") {
  Network net(2, {.backend = Backend::TwoSided});
  const auto id = net.register_action_everywhere("sink", sink());
  auto f = net.send_action(0, 1, id, pattern(100));
  drain(net);
  f.get();
  const auto c = net.counters();
  // request (header + 100 payload) and reply (header + status byte)
  CHECK(c.matching_path_bytes == (kFixed + 100) + (kFixed + 1));
  CHECK(c.eager_bytes == 101);
  CHECK(c.rma_bytes == 0);

  net.reset_counters();
  auto g = net.send_action(0, 1, id, pattern(1 << 20));
  drain(net);
  g.get();
  CHECK(net.counters().matching_path_bytes == (kFixed + (1u << 20)) + (kFixed + 1));
}

TEST_CASE("two-sided delivery is FIFO per source") {
  Network net(2, {.backend = Backend::TwoSided});
  std::vector<int> order;
  const auto id = net.register_action(1, "record", [&](const ActionContext&, Bytes b) {
    order.push_back(b[0]);
    return Bytes{};
  });
  for (int i = 0; i < 20; ++i) net.send_action(0, 1, id, Bytes{static_cast<std::uint8_t>(i)});
  drain(net);
  REQUIRE(order.size() == 20);
  for (int i = 0; i < 20; ++i) CHECK(order[i] == i);
}

TEST_CASE("two-sided backpressure delays but never drops") {
  Network net(2, {.backend = Backend::TwoSided, .queue_depth = 4});
  std::atomic<int> seen{0};
  const auto id = net.register_action(1, "count", [&](const ActionContext&, Bytes) {
    seen++;
    return Bytes{};
  });
  std::vector<Future<Bytes>> fs;
  for (int i = 0; i < 50; ++i) fs.push_back(net.send_action(0, 1, id, pattern(10)));
  CHECK(net.counters().backpressure_events > 0);
  drain(net);
  CHECK(seen == 50);
  for (auto& f : fs) CHECK(f.is_ready());
}

TEST_CASE("one-sided eager and rendezvous accounting") {
  Network net(2, {.backend = Backend::OneSided, .eager_threshold = 4096});
  const auto id = net.register_action_everywhere("sink", sink());
  auto f = net.send_action(0, 1, id, pattern(100));
  drain(net);
  f.get();
  auto c = net.counters();
  CHECK(c.rma_bytes == 0);
  CHECK(c.rendezvous_messages == 0);

  net.reset_counters();
  auto g = net.send_action(0, 1, id, pattern(1 << 20));
  drain(net);
  g.get();
  c = net.counters();
  CHECK(c.rma_bytes == (1u << 20));
  CHECK(c.rendezvous_messages == 1);
  // request header + descriptor, completion ack naming one region, reply
  CHECK(c.matching_path_bytes == (kFixed + kDescriptorBytes) + (kFixed + 8) + (kFixed + 1));
  CHECK(net.registry(0).registered_count() == 0);
}

TEST_CASE("one-sided matching path is smaller than two-sided for large payloads") {
  ByteCounters two, one;
  for (auto backend : {Backend::TwoSided, Backend::OneSided}) {
    Network net(2, {.backend = backend});
    const auto id = net.register_action_everywhere("sink", sink());
    for (int i = 0; i < 10; ++i) net.send_action(0, 1, id, pattern(65536));
    drain(net);
    (backend == Backend::TwoSided ? two : one) = net.counters();
  }
  CHECK(one.matching_path_bytes < two.matching_path_bytes);
  const std::uint64_t payload = 10ull * 65536;
  CHECK(two.total_bytes() - payload == two.header_bytes + 10);  // reply status bytes
  CHECK(one.total_bytes() - payload == one.header_bytes + 10 + 10 * 8);  // plus ack region ids
}

TEST_CASE("rma protocol faults") {
  RmaRegistry a, b;
  const auto landing = b.register_landing(4);
  try {
    a.get(12345, b, landing);
    FAIL("expected a fault");
  } catch (const ProtocolFault& e) {
    CHECK(e.region() == 12345);
  }
  const auto r = a.register_region(pattern(4));
  CHECK_THROWS_AS(a.release(r), ProtocolFault);
  a.get(r, b, landing);
  CHECK(b.take(landing) == pattern(4));
  a.mark_complete(r);
  a.release(r);
  CHECK_FALSE(a.registered(r));
  CHECK_THROWS_AS(a.release(r), ProtocolFault);
}

TEST_CASE("progress counts completions") {
  Network net(2);
  const auto id = net.register_action_everywhere("sink", sink());
  CHECK(net.progress(0) == 0);
  CHECK(net.progress(1) == 0);
  auto f = net.send_action(0, 1, id, pattern(10));
  CHECK(net.progress(1) == 1);
  CHECK_FALSE(f.is_ready());
  CHECK(net.progress(0) == 1);
  CHECK(f.is_ready());
}

TEST_CASE("concurrent pollers handle each completion exactly once") {
  Network net(2);
  std::atomic<int> executions{0};
  const auto id = net.register_action(1, "count", [&](const ActionContext&, Bytes) {
    executions++;
    return Bytes{};
  });
  constexpr int n = 5000;
  for (int i = 0; i < n; ++i) net.send_action(0, 1, id, pattern(8));
  std::atomic<std::size_t> total{0};
  std::vector<std::thread> pollers;
  for (int t = 0; t < 4; ++t) {
    pollers.emplace_back([&] {
      std::size_t mine = 0;
      for (int k = 0; k < 200; ++k) mine += net.progress(1);
      total += mine;
    });
  }
  for (auto& t : pollers) t.join();
  while (net.progress(1) > 0) {
  }
  CHECK(executions == n);
  CHECK(net.handled(1) == static_cast<std::uint64_t>(n));
}

TEST_CASE("unknown action and failing serializer yield errored futures") {
  Network net(2);
  auto f = net.send_action(0, 1, Network::action_id("nope"), pattern(4));
  drain(net);
  CHECK_THROWS_AS(f.get(), RemoteActionError);
  auto g = net.send_action_with(0, 1, 1, [](Writer&) { throw SerializationError("cannot encode"); });
  CHECK_THROWS_AS(g.get(), SerializationError);
  const auto id = net.register_action(1, "throws", [](const ActionContext&, Bytes) -> Bytes {
    throw std::runtime_error("handler failed");
  });
  auto h = net.send_action(0, 1, id, {});
  drain(net);
  CHECK_THROWS_WITH_AS(h.get(), "handler failed", RemoteActionError);
}

TEST_CASE("10^4 concurrent sends from 4 localities with scheduler-driven progress") {
  for (auto backend : {Backend::TwoSided, Backend::OneSided}) {
    constexpr int P = 4;
    Network net(P, {.backend = backend, .eager_threshold = 64});
    std::vector<std::unique_ptr<Scheduler>> scheds;
    for (int l = 0; l < P; ++l) {
      scheds.push_back(std::make_unique<Scheduler>(1, 11 + l));
      net.attach_executor(l, scheds.back().get());
      scheds.back()->add_progress_hook(net.progress_hook(l));
    }
    std::array<std::atomic<int>, P> received{};
    const auto id = net.register_action_everywhere("inc", [&](const ActionContext& ctx, Bytes b) {
      received[ctx.dest]++;
      return b;
    });
    std::array<int, P> sent{};
    std::vector<Future<Bytes>> fs;
    std::mt19937 rng(5);
    for (int i = 0; i < 10000; ++i) {
      const int src = i % P;
      const int dest = static_cast<int>(rng() % P);
      sent[dest]++;
      fs.push_back(net.send_action(src, dest, id, pattern(i % 3 == 0 ? 200 : 16, static_cast<std::uint8_t>(i))));
    }
    for (std::size_t i = 0; i < fs.size(); ++i) {
      REQUIRE(fs[i].wait_for(std::chrono::seconds(30)));
      CHECK(fs[i].get() == pattern(i % 3 == 0 ? 200 : 16, static_cast<std::uint8_t>(i)));
    }
    for (auto& s : scheds) s->wait_quiescent();
    for (int l = 0; l < P; ++l) CHECK(received[l] == sent[l]);
  }
}

TEST_CASE("no loss or duplication under random progress interleavings") {
  std::mt19937_64 rng(17);
  int failures = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto backend = trial % 2 == 0 ? Backend::TwoSided : Backend::OneSided;
    Network net(3, {.backend = backend, .eager_threshold = 32, .queue_depth = 2});
    std::array<int, 3> executions{};
    const auto id = net.register_action_everywhere("e", [&](const ActionContext& ctx, Bytes b) {
      executions[ctx.dest]++;
      return b;
    });
    std::vector<std::pair<Future<Bytes>, Bytes>> fs;
    std::array<int, 3> expected{};
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const int src = static_cast<int>(rng() % 3);
      const int dest = static_cast<int>(rng() % 3);
      auto payload = pattern(rng() % 80, static_cast<std::uint8_t>(i));
      expected[dest]++;
      fs.emplace_back(net.send_action(src, dest, id, payload), payload);
    }
    int guard = 0;
    while (net.busy() && guard++ < 10000) net.progress(static_cast<int>(rng() % 3));
    for (auto& [f, payload] : fs) {
      if (!f.is_ready() || f.get() != payload) ++failures;
    }
    if (executions != expected) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("simulated time favours one-sided for a halo-heavy workload") {
  double t_two = 0, t_one = 0;
  for (auto backend : {Backend::TwoSided, Backend::OneSided}) {
    constexpr int P = 8;
    Network net(P, {.backend = backend});
    const auto id = net.register_action_everywhere("sink", sink());
    for (int round = 0; round < 4; ++round) {
      for (int l = 0; l < P; ++l) {
        for (int k = 1; k <= 3; ++k) net.send_action(l, (l + k) % P, id, pattern(65536));
      }
    }
    drain(net);
    (backend == Backend::TwoSided ? t_two : t_one) = net.simulated_time_us();
  }
  CHECK(t_one > 0);
  CHECK(t_one < t_two);
}
