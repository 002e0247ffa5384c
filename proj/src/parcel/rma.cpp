#include "okt/parcel/rma.hpp"

#include <cstring>

namespace okt::parcel {

std::uint64_t RmaRegistry::register_region(Bytes buffer) {
  std::lock_guard lk(mutex_);
  const auto id = next_++;
  regions_.emplace(id, Region{std::move(buffer), false});
  ++registrations_;
  return id;
}

std::uint64_t RmaRegistry::register_landing(std::size_t length) { return register_region(Bytes(length)); }

void RmaRegistry::get(std::uint64_t region, RmaRegistry& into, std::uint64_t dst) const {
  // Lock order by address keeps concurrent gets in opposite directions safe.
  std::unique_lock<std::mutex> a, b;
  if (&into == this) {
    a = std::unique_lock(mutex_);
  } else if (this < &into) {
    a = std::unique_lock(mutex_);
    b = std::unique_lock(into.mutex_);
  } else {
    b = std::unique_lock(into.mutex_);
    a = std::unique_lock(mutex_);
  }
  auto src = regions_.find(region);
  if (src == regions_.end()) throw ProtocolFault("get on unregistered region", region);
  auto tgt = into.regions_.find(dst);
  if (tgt == into.regions_.end()) throw ProtocolFault("get into unregistered landing region", dst);
  if (tgt->second.data.size() != src->second.data.size()) throw ProtocolFault("landing region size mismatch", dst);
  if (!src->second.data.empty()) std::memcpy(tgt->second.data.data(), src->second.data.data(), src->second.data.size());
  tgt->second.complete = true;
}

std::size_t RmaRegistry::length(std::uint64_t region) const {
  std::lock_guard lk(mutex_);
  auto it = regions_.find(region);
  if (it == regions_.end()) throw ProtocolFault("length of unregistered region", region);
  return it->second.data.size();
}

void RmaRegistry::mark_complete(std::uint64_t region) {
  std::lock_guard lk(mutex_);
  auto it = regions_.find(region);
  if (it == regions_.end()) throw ProtocolFault("completion for unregistered region", region);
  it->second.complete = true;
}

void RmaRegistry::release(std::uint64_t region) {
  std::lock_guard lk(mutex_);
  auto it = regions_.find(region);
  if (it == regions_.end()) throw ProtocolFault("release of unregistered region", region);
  if (!it->second.complete) throw ProtocolFault("release before completion", region);
  regions_.erase(it);
}

Bytes RmaRegistry::take(std::uint64_t region) {
  std::lock_guard lk(mutex_);
  auto it = regions_.find(region);
  if (it == regions_.end()) throw ProtocolFault("take of unregistered region", region);
  if (!it->second.complete) throw ProtocolFault("take before completion", region);
  Bytes out = std::move(it->second.data);
  regions_.erase(it);
  return out;
}

bool RmaRegistry::registered(std::uint64_t region) const {
  std::lock_guard lk(mutex_);
  return regions_.count(region) != 0;
}

std::size_t RmaRegistry::registered_count() const {
  std::lock_guard lk(mutex_);
  return regions_.size();
}

std::uint64_t RmaRegistry::total_registrations() const {
  std::lock_guard lk(mutex_);
  return registrations_;
}

}  // namespace okt::parcel
