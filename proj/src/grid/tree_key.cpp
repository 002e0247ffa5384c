#include "okt/grid/tree_key.hpp"

#include <stdexcept>

namespace okt::grid {

namespace {

std::uint64_t compact3(std::uint64_t v) {
  v &= 0x1249249249249249ULL;
  v = (v ^ (v >> 2)) & 0x10c30c30c30c30c3ULL;
  v = (v ^ (v >> 4)) & 0x100f00f00f00f00fULL;
  v = (v ^ (v >> 8)) & 0x1f0000ff0000ffULL;
  v = (v ^ (v >> 16)) & 0x1f00000000ffffULL;
  v = (v ^ (v >> 32)) & 0x1fffffULL;
  return v;
}

void check_level(std::uint32_t level) {
  if (level > kMaxLevel) throw std::out_of_range("tree level " + std::to_string(level) + " exceeds maximum");
}

}  // namespace

std::uint64_t morton_key(std::uint32_t level, const Index3& idx) {
  check_level(level);
  const std::uint64_t limit = 1ULL << level;
  for (auto c : idx) {
    if (c >= limit)
      throw std::out_of_range("index " + std::to_string(c) + " out of range for level " + std::to_string(level));
  }
  return detail::interleave(idx);
}

Index3 morton_decode(std::uint32_t level, std::uint64_t code) {
  check_level(level);
  if (level < kMaxLevel && (code >> (3 * level)) != 0)
    throw std::out_of_range("morton code out of range for level " + std::to_string(level));
  return {static_cast<std::uint32_t>(compact3(code)), static_cast<std::uint32_t>(compact3(code >> 1)),
          static_cast<std::uint32_t>(compact3(code >> 2))};
}

TreeKey::TreeKey(std::uint32_t l, Index3 i) : level(l), idx(i) {
  check_level(l);
  for (auto c : i) {
    if (c >= (1u << l)) throw std::out_of_range("tree key index out of range for level " + std::to_string(l));
  }
}

TreeKey TreeKey::parent() const {
  if (level == 0) throw std::logic_error("root has no parent");
  return TreeKey(level - 1, {idx[0] >> 1, idx[1] >> 1, idx[2] >> 1});
}

TreeKey TreeKey::child(int c) const {
  return TreeKey(level + 1, {2 * idx[0] + (c & 1), 2 * idx[1] + ((c >> 1) & 1), 2 * idx[2] + ((c >> 2) & 1)});
}

int TreeKey::child_index() const {
  return static_cast<int>((idx[0] & 1) | ((idx[1] & 1) << 1) | ((idx[2] & 1) << 2));
}

std::string TreeKey::str() const {
  return "L" + std::to_string(level) + "(" + std::to_string(idx[0]) + "," + std::to_string(idx[1]) + "," +
         std::to_string(idx[2]) + ")";
}

}  // namespace okt::grid
