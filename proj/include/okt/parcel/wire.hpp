#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "okt/parcel/serialize.hpp"

namespace okt::parcel {

inline constexpr std::array<std::uint8_t, 4> kMagic{'O', 'K', 'P', '1'};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderBytes = 22;
inline constexpr std::size_t kCorrelationBytes = 8;
inline constexpr std::size_t kDescriptorBytes = 16;

enum Flags : std::uint8_t {
  kRendezvous = 1u << 0,
  kReply = 1u << 1,
  kAck = 1u << 2,
};

struct Header {
  std::uint8_t version = kWireVersion;
  std::uint16_t source = 0;
  std::uint16_t dest = 0;
  std::uint32_t action = 0;
  std::uint8_t flags = 0;
  // Inline body length for eager messages; total region length for
  // rendezvous messages.
  std::uint64_t payload_length = 0;
  bool operator==(const Header&) const = default;
};

struct Descriptor {
  std::uint64_t region = 0;
  std::uint64_t length = 0;
  bool operator==(const Descriptor&) const = default;
};

// On the wire: header, correlation id, then the payload (eager) or
// descriptors to the end of the message (rendezvous).
struct Parcel {
  Header header;
  std::uint64_t correlation = 0;
  Bytes payload;
  std::vector<Descriptor> descriptors;
  bool rendezvous() const noexcept { return (header.flags & kRendezvous) != 0; }
  bool operator==(const Parcel&) const = default;
};

Bytes encode(const Parcel& p);
Parcel decode(std::span<const std::uint8_t> wire);

// Bytes a parcel occupies on the inline (matching) path.
std::size_t inline_size(const Parcel& p);

}  // namespace okt::parcel
