#include "okt/fmm/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace okt::fmm {

namespace {

constexpr std::size_t kTargetCount = 1074;

int norm2(const Offset& d) { return d[0] * d[0] + d[1] * d[1] + d[2] * d[2]; }

std::size_t union_rule_count(double radius2) {
  const int lim = static_cast<int>(2 * std::ceil(std::sqrt(radius2))) + 2;
  std::size_t count = 0;
  for (int x = -lim; x <= lim; ++x)
    for (int y = -lim; y <= lim; ++y)
      for (int z = -lim; z <= lim; ++z) {
        if (!x && !y && !z) continue;
        for (int a = 0; a < 8; ++a) {
          const Offset p{floor_half((a & 1) + x), floor_half(((a >> 1) & 1) + y), floor_half(((a >> 2) & 1) + z)};
          if (norm2(p) < radius2) {
            ++count;
            break;
          }
        }
      }
  return count;
}

}  // namespace

bool Stencil::contains(const Offset& d) const {
  return std::binary_search(offsets.begin(), offsets.end(), StencilEntry{d, 0, false, 0},
                            [](const StencilEntry& a, const StencilEntry& b) { return a.d < b.d; });
}

bool Stencil::contains(const Offset& d, int parity) const {
  auto it = std::lower_bound(offsets.begin(), offsets.end(), d,
                             [](const StencilEntry& a, const Offset& v) { return a.d < v; });
  return it != offsets.end() && it->d == d && (it->parity_mask >> parity & 1);
}

std::size_t Stencil::near_count() const { return near.size(); }

double calibrate_radius_scale() {
  static const double scale = [] {
    double best = 0.0, closest = 0.0;
    std::size_t best_gap = static_cast<std::size_t>(-1);
    for (int k = 1; k <= 4000; ++k) {
      const double c = k * 1e-3;
      const double r = c / 0.5;
      const std::size_t n = union_rule_count(r * r);
      if (n == kTargetCount) best = c;
      const std::size_t gap = n > kTargetCount ? n - kTargetCount : kTargetCount - n;
      if (gap < best_gap) {
        best_gap = gap;
        closest = c;
      }
      if (n > 2 * kTargetCount) break;
    }
    return best > 0.0 ? best : closest;
  }();
  return scale;
}

double stencil_radius2(double theta) {
  const double r = calibrate_radius_scale() / theta;
  return r * r;
}

Stencil generate_stencil_r2(double radius2, double theta) {
  Stencil s;
  s.theta = theta;
  s.radius2 = radius2;
  const int lim = static_cast<int>(2 * std::ceil(std::sqrt(radius2))) + 2;
  for (int x = -lim; x <= lim; ++x)
    for (int y = -lim; y <= lim; ++y)
      for (int z = -lim; z <= lim; ++z) {
        if (!x && !y && !z) continue;
        const Offset d{x, y, z};
        std::uint8_t mask = 0;
        for (int a = 0; a < 8; ++a) {
          const Offset p{floor_half((a & 1) + x), floor_half(((a >> 1) & 1) + y), floor_half(((a >> 2) & 1) + z)};
          if (norm2(p) < radius2) mask |= static_cast<std::uint8_t>(1u << a);
        }
        const int n2 = norm2(d);
        if (n2 < radius2) s.near.push_back(d);
        if (!mask) continue;
        s.offsets.push_back({d, mask, n2 < radius2, n2});
        s.max_offset = std::max({s.max_offset, std::abs(x), std::abs(y), std::abs(z)});
      }
  return s;
}

Stencil generate_stencil(const FmmConfig& cfg) {
  cfg.validate();
  return generate_stencil_r2(stencil_radius2(cfg.theta), cfg.theta);
}

std::size_t all_pairs_rule_count(double radius2) {
  const int lim = static_cast<int>(2 * std::ceil(std::sqrt(radius2))) + 3;
  std::size_t count = 0;
  for (int x = -lim; x <= lim; ++x)
    for (int y = -lim; y <= lim; ++y)
      for (int z = -lim; z <= lim; ++z) {
        if (!x && !y && !z) continue;
        bool hit = false;
        for (int a = 0; a < 8 && !hit; ++a)
          for (int b = 0; b < 8 && !hit; ++b) {
            const Offset p{floor_half(x + (b & 1) - (a & 1)), floor_half(y + ((b >> 1) & 1) - ((a >> 1) & 1)),
                           floor_half(z + ((b >> 2) & 1) - ((a >> 2) & 1))};
            hit = norm2(p) < radius2;
          }
        count += hit ? 1 : 0;
      }
  return count;
}

}  // namespace okt::fmm
