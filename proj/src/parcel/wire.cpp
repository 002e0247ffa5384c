#include "okt/parcel/wire.hpp"

#include <algorithm>
#include <string>

namespace okt::parcel {

std::size_t inline_size(const Parcel& p) {
  return kHeaderBytes + kCorrelationBytes + (p.rendezvous() ? p.descriptors.size() * kDescriptorBytes : p.payload.size());
}

Bytes encode(const Parcel& p) {
  if (p.rendezvous() && !p.payload.empty()) throw SerializationError("rendezvous parcel carries an inline payload");
  if (!p.rendezvous() && !p.descriptors.empty()) throw SerializationError("eager parcel carries descriptors");
  if (!p.rendezvous() && p.header.payload_length != p.payload.size())
    throw SerializationError("payload length does not match payload");
  if (p.rendezvous()) {
    std::uint64_t total = 0;
    for (const auto& d : p.descriptors) total += d.length;
    if (total != p.header.payload_length) throw SerializationError("payload length does not match descriptors");
  }
  Writer w;
  w.put_raw(kMagic.data(), kMagic.size());
  w.put<std::uint8_t>(p.header.version);
  w.put<std::uint16_t>(p.header.source);
  w.put<std::uint16_t>(p.header.dest);
  w.put<std::uint32_t>(p.header.action);
  w.put<std::uint8_t>(p.header.flags);
  w.put<std::uint64_t>(p.header.payload_length);
  w.put<std::uint64_t>(p.correlation);
  if (p.rendezvous()) {
    for (const auto& d : p.descriptors) {
      w.put<std::uint64_t>(d.region);
      w.put<std::uint64_t>(d.length);
    }
  } else {
    w.put_raw(p.payload.data(), p.payload.size());
  }
  return std::move(w).take();
}

Parcel decode(std::span<const std::uint8_t> wire) {
  Reader r(wire);
  std::array<std::uint8_t, 4> magic{};
  r.get_raw(magic.data(), magic.size());
  if (magic != kMagic) throw SerializationError("bad parcel magic");
  Parcel p;
  p.header.version = r.get<std::uint8_t>();
  if (p.header.version != kWireVersion)
    throw SerializationError("unsupported parcel version " + std::to_string(p.header.version));
  p.header.source = r.get<std::uint16_t>();
  p.header.dest = r.get<std::uint16_t>();
  p.header.action = r.get<std::uint32_t>();
  p.header.flags = r.get<std::uint8_t>();
  p.header.payload_length = r.get<std::uint64_t>();
  p.correlation = r.get<std::uint64_t>();
  if (p.rendezvous()) {
    if (r.remaining() % kDescriptorBytes != 0) throw SerializationError("ragged descriptor list");
    while (!r.done()) {
      Descriptor d;
      d.region = r.get<std::uint64_t>();
      d.length = r.get<std::uint64_t>();
      p.descriptors.push_back(d);
    }
  } else {
    if (r.remaining() != p.header.payload_length) throw SerializationError("payload length mismatch");
    p.payload.resize(r.remaining());
    r.get_raw(p.payload.data(), p.payload.size());
  }
  return p;
}

}  // namespace okt::parcel
