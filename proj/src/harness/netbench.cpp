#include "okt/harness/netbench.hpp"

#include <stdexcept>
#include <vector>

namespace okt::harness {

HaloWorkloadResult synthetic_halo(parcel::Backend backend, const HaloWorkload& w) {
  if (w.localities < 2 || w.neighbors < 1 || w.neighbors >= w.localities)
    throw std::invalid_argument("halo workload needs 2+ localities and 1..P-1 neighbors");
  parcel::NetworkConfig nc;
  nc.backend = backend;
  nc.eager_threshold = w.eager_threshold;
  parcel::Network net(w.localities, nc);
  std::uint64_t received = 0;
  const auto id = net.register_action_everywhere("halo.sink", [&received](const parcel::ActionContext&, parcel::Bytes b) {
    received += b.size();
    return parcel::Bytes{};
  });
  std::vector<runtime::Future<parcel::Bytes>> fs;
  parcel::Bytes payload(w.bytes);
  for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<std::uint8_t>(i * 131u + 7u);
  for (int r = 0; r < w.rounds; ++r)
    for (int l = 0; l < w.localities; ++l)
      for (int k = 1; k <= w.neighbors; ++k) fs.push_back(net.send_action(l, (l + k) % w.localities, id, payload));
  while (net.busy())
    for (int l = 0; l < w.localities; ++l) net.progress(l);
  for (auto& f : fs) f.get();
  const std::uint64_t expect = static_cast<std::uint64_t>(w.rounds) * w.localities * w.neighbors * w.bytes;
  if (received != expect) throw std::logic_error("halo workload lost payload bytes");
  return {net.counters(), net.simulated_time_us()};
}

}  // namespace okt::harness
