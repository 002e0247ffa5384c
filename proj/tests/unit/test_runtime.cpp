#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <random>
#include <thread>

#include "okt/runtime/channel.hpp"
#include "okt/runtime/future.hpp"
#include "okt/runtime/offload_sim.hpp"
#include "okt/runtime/scheduler.hpp"
#include "okt/runtime/stream_pool.hpp"

using namespace okt::runtime;

namespace {

void spin_for(std::chrono::microseconds d) {
  const auto until = std::chrono::steady_clock::now() + d;
  while (std::chrono::steady_clock::now() < until) {
  }
}

// Sum of a binary reduction tree built from futures.
long reduce_tree(Scheduler& s, int lo, int hi) {
  std::vector<Future<long>> leaves;
  for (int i = lo; i < hi; ++i) leaves.push_back(async(s, [i] { return static_cast<long>(i) * i; }));
  while (leaves.size() > 1) {
    std::vector<Future<long>> next;
    for (std::size_t i = 0; i + 1 < leaves.size(); i += 2) {
      std::vector<Future<long>> pair;
      pair.push_back(std::move(leaves[i]));
      pair.push_back(std::move(leaves[i + 1]));
      next.push_back(when_all(std::move(pair)).then([](std::vector<long> v) { return v[0] * 3 + v[1]; }));
    }
    if (leaves.size() % 2 == 1) next.push_back(std::move(leaves.back()));
    leaves = std::move(next);
  }
  return leaves.front().get();
}

}  // namespace

TEST_CASE("async then chains the value") {
  Scheduler s(2);
  auto f = async(s, [] { return 1; }).then([](int x) { return x + 1; });
  CHECK(f.get() == 2);
}

TEST_CASE("when_all of zero futures is immediately ready") {
  auto f = when_all(std::vector<Future<int>>{});
  CHECK(f.is_ready());
  CHECK(f.get().empty());
}

TEST_CASE("diamond graph sees both branches exactly once") {
  Scheduler s(4);
  std::atomic<int> b_runs{0}, c_runs{0};
  Promise<int> a_promise(&s, "a");
  auto a = a_promise.get_future();
  auto shared = std::make_shared<Future<int>>(std::move(a));
  // Fan out by re-publishing a's value into two promises.
  Promise<int> pb(&s, "to-b"), pc(&s, "to-c");
  auto fb = pb.get_future().then([&](int x) {
    b_runs++;
    return x + 10;
  });
  auto fc = pc.get_future().then([&](int x) {
    c_runs++;
    return x + 100;
  });
  auto fan = std::move(*shared).then([pb = std::move(pb), pc = std::move(pc)](int x) mutable {
    pb.set_value(x);
    pc.set_value(x);
  });
  std::vector<Future<int>> both;
  both.push_back(std::move(fb));
  both.push_back(std::move(fc));
  auto d = when_all(std::move(both)).then([](std::vector<int> v) { return v[0] + v[1]; });
  a_promise.set_value(1);
  CHECK(d.get() == 112);
  fan.get();
  CHECK(b_runs == 1);
  CHECK(c_runs == 1);
}

TEST_CASE("task exceptions surface as errored futures and propagate") {
  Scheduler s(2);
  auto f = async(s, []() -> int { throw std::runtime_error("boom"); });
  bool continuation_ran = false;
  auto g = std::move(f).then([&](int x) {
    continuation_ran = true;
    return x;
  });
  CHECK_THROWS_WITH_AS(g.get(), "boom", std::runtime_error);
  CHECK_FALSE(continuation_ran);
}

TEST_CASE("then unwraps a returned future") {
  Scheduler s(2);
  auto f = async(s, [] { return 3; }).then([&s](int x) { return async(s, [x] { return x * 7; }); });
  CHECK(f.get() == 21);
}

TEST_CASE("continuations never run before readiness") {
  Scheduler s(4);
  constexpr int n = 200;
  std::vector<Future<int>> outs;
  std::vector<Promise<std::pair<int, std::shared_ptr<std::atomic<bool>>>>> promises;
  std::atomic<int> violations{0};
  for (int i = 0; i < n; ++i) {
    promises.emplace_back(&s);
    outs.push_back(promises.back().get_future().then([&](std::pair<int, std::shared_ptr<std::atomic<bool>>> v) {
      if (!v.second->load()) violations++;
      return v.first;
    }));
  }
  for (int i = 0; i < n; ++i) {
    auto token = std::make_shared<std::atomic<bool>>(true);
    promises[i].set_value({i, token});
  }
  int sum = 0;
  for (auto& f : outs) sum += f.get();
  CHECK(sum == n * (n - 1) / 2);
  CHECK(violations == 0);
}

TEST_CASE("broken promise errors the future") {
  Future<int> f;
  {
    Promise<int> p(nullptr, "dropped");
    f = p.get_future();
  }
  CHECK_THROWS_AS(f.get(), BrokenPromise);
}

TEST_CASE("channel get before send and send before get") {
  Channel<int> ch;
  ch.register_key("halo");
  auto f = ch.get_future("halo", 0);
  CHECK_FALSE(f.is_ready());
  ch.send("halo", 0, 5);
  CHECK(f.get() == 5);
  ch.send("halo", 1, 6);
  auto g = ch.get_future("halo", 1);
  CHECK(g.is_ready());
  CHECK(g.get() == 6);
  CHECK(ch.outstanding() == 0);
}

TEST_CASE("channel matches by step regardless of arrival order") {
  Channel<int> ch;
  ch.register_key("k");
  std::vector<Future<int>> fs;
  for (int step = 1; step <= 3; ++step) fs.push_back(ch.get_future("k", step));
  ch.send("k", 3, 30);
  ch.send("k", 1, 10);
  ch.send("k", 2, 20);
  CHECK(fs[0].get() == 10);
  CHECK(fs[1].get() == 20);
  CHECK(fs[2].get() == 30);
}

TEST_CASE("channel protocol errors") {
  Channel<int> ch;
  ch.register_key("k");
  ch.send("k", 0, 1);
  CHECK_THROWS_AS(ch.send("k", 0, 2), ProtocolError);
  CHECK_THROWS_AS(ch.send("unknown", 0, 2), ProtocolError);
  CHECK_THROWS_AS(ch.get_future("unknown", 0), ProtocolError);
  auto f = ch.get_future("k", 0);
  CHECK_THROWS_AS(ch.get_future("k", 0), ProtocolError);
  CHECK(f.get() == 1);
}

TEST_CASE("channel delivery is exactly once under random interleavings") {
  std::mt19937_64 rng(42);
  constexpr int trials = 10000;
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    Channel<int> ch;
    ch.register_key("a");
    ch.register_key("b");
    // ops: (is_send, key, step)
    std::vector<std::tuple<bool, int, int>> ops;
    for (int k = 0; k < 2; ++k) {
      for (int step = 0; step < 3; ++step) {
        ops.emplace_back(true, k, step);
        ops.emplace_back(false, k, step);
      }
    }
    std::shuffle(ops.begin(), ops.end(), rng);
    std::map<std::pair<int, int>, Future<int>> futures;
    for (auto& [is_send, k, step] : ops) {
      const std::string key = k == 0 ? "a" : "b";
      if (is_send) {
        ch.send(key, step, k * 100 + step);
      } else {
        futures.emplace(std::make_pair(k, step), ch.get_future(key, step));
      }
    }
    for (auto& [id, f] : futures) {
      if (!f.is_ready() || f.get() != id.first * 100 + id.second) ++failures;
    }
    if (ch.outstanding() != 0) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("channel concurrent senders and receivers") {
  Scheduler s(4);
  Channel<int> ch(&s);
  ch.register_key("x");
  constexpr int steps = 2000;
  std::vector<Future<int>> got;
  for (int i = 0; i < steps; i += 2) got.push_back(ch.get_future("x", i));
  std::vector<Future<Unit>> sends;
  for (int i = 0; i < steps; ++i) sends.push_back(async(s, [&ch, i] { ch.send("x", i, i); }));
  for (auto& f : sends) f.get();
  for (int i = 1; i < steps; i += 2) got.push_back(ch.get_future("x", i));
  long sum = 0;
  for (auto& f : got) sum += f.get();
  CHECK(sum == static_cast<long>(steps) * (steps - 1) / 2);
}

TEST_CASE("1000 independent tasks on 4 workers all run and every worker participates") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::atomic<int> done{0};
    std::vector<UniqueTask> roots;
    for (int i = 0; i < 1000; ++i) {
      roots.emplace_back([&done] {
        spin_for(std::chrono::microseconds(30));
        done++;
      });
    }
    auto stats = run_scheduler(4, std::move(roots), seed);
    CHECK(done == 1000);
    REQUIRE(stats.tasks_per_worker.size() == 4);
    CHECK(std::accumulate(stats.tasks_per_worker.begin(), stats.tasks_per_worker.end(), 0ULL) == 1000);
    for (auto n : stats.tasks_per_worker) CHECK(n >= 1);
  }
}

TEST_CASE("work stealing moves tasks spawned on one worker") {
  Scheduler s(4);
  std::atomic<int> done{0};
  auto root = async(s, [&] {
    for (int i = 0; i < 400; ++i) {
      s.post([&done] {
        spin_for(std::chrono::microseconds(50));
        done++;
      });
    }
  });
  root.get();
  s.wait_quiescent();
  CHECK(done == 400);
  CHECK(s.steals() > 0);
}

TEST_CASE("deterministic task graph gives identical results on 1 and 4 workers") {
  long r1 = 0, r4 = 0;
  {
    Scheduler s(1);
    r1 = reduce_tree(s, 0, 300);
  }
  {
    Scheduler s(4);
    r4 = reduce_tree(s, 0, 300);
  }
  CHECK(r1 == r4);
}

TEST_CASE("cyclic future dependency trips the deadlock detector") {
  Scheduler s(2);
  Promise<int> pa(&s, "cycle-a");
  Promise<int> pb(&s, "cycle-b");
  auto fa = pa.get_future();
  auto fb = pb.get_future();
  auto x = std::move(fa).then([pb = std::move(pb)](int v) mutable { pb.set_value(v); });
  auto y = std::move(fb).then([pa = std::move(pa)](int v) mutable { pa.set_value(v); });
  try {
    s.wait_quiescent();
    FAIL("expected a deadlock");
  } catch (const DeadlockError& e) {
    const auto& o = e.origins();
    CHECK(std::count(o.begin(), o.end(), "cycle-a") == 1);
    CHECK(std::count(o.begin(), o.end(), "cycle-b") == 1);
  }
}

TEST_CASE("stream pool falls back to local when all slots are busy") {
  Scheduler s(2);
  StreamPool pool(s, {.slots = 2, .workers = 2});
  std::atomic<bool> release{false};
  auto long_kernel = [&] {
    while (!release.load()) std::this_thread::yield();
    return 1;
  };
  auto f1 = pool.submit("k", 10, long_kernel, [] { return 1; });
  auto f2 = pool.submit("k", 10, long_kernel, [] { return 1; });
  auto f3 = pool.submit("k", 10, [] { return 1; }, [] { return 1; });
  CHECK(f3.is_ready());
  release = true;
  CHECK(f1.get() + f2.get() + f3.get() == 3);
  auto c = pool.counters().at("k");
  CHECK(c.offloaded == 2);
  CHECK(c.ran_local == 1);
}

TEST_CASE("serial short kernels never fall back with 128 slots") {
  Scheduler s(2);
  StreamPool pool(s, {.slots = 128, .workers = 2});
  for (int i = 0; i < 500; ++i) {
    auto f = pool.submit("short", 1, [i] { return i; }, [i] { return i; });
    CHECK(f.get() == i);
  }
  auto c = pool.counters().at("short");
  CHECK(c.offloaded == 500);
  CHECK(c.ran_local == 0);
}

TEST_CASE("stream pool counters add up and results do not depend on the path") {
  Scheduler s(4);
  StreamPool pool(s, {.slots = 3, .workers = 4, .streams_per_worker = 1});
  auto kernel = [](int i) {
    double acc = 0;
    for (int k = 1; k <= 200; ++k) acc += std::sin(i * 0.001 * k) / k;
    return acc;
  };
  std::vector<Future<double>> outs;
  std::vector<Future<Unit>> drivers;
  auto results = std::make_shared<std::vector<double>>(400);
  for (int i = 0; i < 400; ++i) {
    drivers.push_back(async(s, [&, i] {
      auto f = pool.submit("mix", 1, [&, i] { return kernel(i); }, [&, i] { return kernel(i); });
      (*results)[i] = f.get();
    }));
  }
  for (auto& d : drivers) d.get();
  for (int i = 0; i < 400; ++i) CHECK((*results)[i] == kernel(i));
  auto t = pool.totals();
  CHECK(t.offloaded + t.ran_local == 400);
}

TEST_CASE("offload simulation: fraction non-increasing in workers") {
  OffloadSimConfig c;
  c.slots = 16;
  double prev = 1.1;
  for (int w : {2, 4, 8}) {
    c.workers = w;
    auto r = simulate_offload(c);
    CHECK(r.offloaded + r.ran_local == c.kernels);
    CHECK(r.fraction() <= prev);
    prev = r.fraction();
  }
  c.slots = 128;
  c.workers = 2;
  CHECK(simulate_offload(c).fraction() > 0.99);
}

TEST_CASE("offload simulation: two slots, two long kernels, third submission runs local") {
  OffloadSimConfig c;
  c.workers = 1;
  c.slots = 2;
  c.device_lanes = 2;
  c.kernels = 3;
  c.kernel_work = 1e6;
  c.cpu_work = 0;
  auto r = simulate_offload(c);
  CHECK(r.offloaded == 2);
  CHECK(r.ran_local == 1);
}
