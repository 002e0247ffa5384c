#pragma once

#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "okt/parcel/serialize.hpp"

namespace okt::parcel {

class ProtocolFault : public std::runtime_error {
 public:
  ProtocolFault(const std::string& what, std::uint64_t region)
      : std::runtime_error(what + " (region " + std::to_string(region) + ")"), region_(region) {}
  std::uint64_t region() const noexcept { return region_; }

 private:
  std::uint64_t region_;
};

// Registered ("pinned") buffers owned by one locality. A remote get may read
// a region only while it is registered; the owner may release it only after
// the reader has acknowledged completion.
class RmaRegistry {
 public:
  std::uint64_t register_region(Bytes buffer);
  // Registers a zero-filled landing buffer for an incoming get.
  std::uint64_t register_landing(std::size_t length);

  // Copies the whole region into the landing region `dst` of `into`.
  void get(std::uint64_t region, RmaRegistry& into, std::uint64_t dst) const;
  std::size_t length(std::uint64_t region) const;

  void mark_complete(std::uint64_t region);
  void release(std::uint64_t region);
  // Unregisters a completed landing region and hands its bytes to the caller.
  Bytes take(std::uint64_t region);

  bool registered(std::uint64_t region) const;
  std::size_t registered_count() const;
  std::uint64_t total_registrations() const;

 private:
  struct Region {
    Bytes data;
    bool complete = false;
  };

  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, Region> regions_;
  std::uint64_t next_ = 1;
  std::uint64_t registrations_ = 0;
};

}  // namespace okt::parcel
