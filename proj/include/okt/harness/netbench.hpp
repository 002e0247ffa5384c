#pragma once

#include <cstddef>

#include "okt/parcel/network.hpp"

namespace okt::harness {

struct HaloWorkload {
  int localities = 8;
  int neighbors = 3;  // each locality sends to the next `neighbors` ones
  int rounds = 4;
  std::size_t bytes = 64 * 1024;
  std::size_t eager_threshold = 4096;
};

struct HaloWorkloadResult {
  parcel::ByteCounters bytes;
  double simulated_us = 0;
};

// Ring halo traffic on a fresh network, drained by polling every endpoint.
HaloWorkloadResult synthetic_halo(parcel::Backend backend, const HaloWorkload& w);

}  // namespace okt::harness
