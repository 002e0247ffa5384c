#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace okt::grid {

inline constexpr std::uint32_t kMaxLevel = 21;  // 3 * 21 bits fit a 64-bit code

using Index3 = std::array<std::uint32_t, 3>;

namespace detail {

constexpr std::uint64_t spread3(std::uint64_t v) {
  v &= 0x1fffffULL;
  v = (v | (v << 32)) & 0x1f00000000ffffULL;
  v = (v | (v << 16)) & 0x1f0000ff0000ffULL;
  v = (v | (v << 8)) & 0x100f00f00f00f00fULL;
  v = (v | (v << 4)) & 0x10c30c30c30c30c3ULL;
  v = (v | (v << 2)) & 0x1249249249249249ULL;
  return v;
}

constexpr std::uint64_t interleave(const std::array<std::uint32_t, 3>& idx) {
  return spread3(idx[0]) | (spread3(idx[1]) << 1) | (spread3(idx[2]) << 2);
}

}  // namespace detail

// Bit-interleaves idx: x into bit 0, y into bit 1, z into bit 2 of each
// triplet, least significant first.
std::uint64_t morton_key(std::uint32_t level, const Index3& idx);
Index3 morton_decode(std::uint32_t level, std::uint64_t code);

struct TreeKey {
  std::uint32_t level = 0;
  Index3 idx{0, 0, 0};

  TreeKey() = default;
  TreeKey(std::uint32_t l, Index3 i);

  std::uint64_t sfc() const { return detail::interleave(idx); }
  TreeKey parent() const;
  // Child c has x offset in bit 0, y in bit 1, z in bit 2.
  TreeKey child(int c) const;
  int child_index() const;
  std::uint32_t extent() const { return 1u << level; }
  std::string str() const;

  bool operator==(const TreeKey& o) const { return level == o.level && idx == o.idx; }
  // Level-major, then space-filling-curve order.
  std::strong_ordering operator<=>(const TreeKey& o) const {
    if (auto c = level <=> o.level; c != 0) return c;
    return sfc() <=> o.sfc();
  }
};

struct TreeKeyHash {
  std::size_t operator()(const TreeKey& k) const noexcept {
    return std::hash<std::uint64_t>{}(k.sfc() * 64 + k.level);
  }
};

}  // namespace okt::grid
