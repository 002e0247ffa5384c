#pragma once

#include <array>
#include <cstdint>

namespace okt::fmm {

inline constexpr int kMaxOrder = 3;
inline constexpr int kMaxCoeffs = 20;  // (p+1)(p+2)(p+3)/6 at p = 3

constexpr int coeff_count(int p) { return (p + 1) * (p + 2) * (p + 3) / 6; }

struct MultiIndex {
  std::uint8_t n[3];
  constexpr int order() const { return n[0] + n[1] + n[2]; }
};

// Graded lexicographic order: 1, x, y, z, xx, xy, xz, yy, yz, zz, xxx, ...
inline constexpr std::array<MultiIndex, kMaxCoeffs> kIndex = {{
    {{0, 0, 0}},
    {{1, 0, 0}}, {{0, 1, 0}}, {{0, 0, 1}},
    {{2, 0, 0}}, {{1, 1, 0}}, {{1, 0, 1}}, {{0, 2, 0}}, {{0, 1, 1}}, {{0, 0, 2}},
    {{3, 0, 0}}, {{2, 1, 0}}, {{2, 0, 1}}, {{1, 2, 0}}, {{1, 1, 1}},
    {{1, 0, 2}}, {{0, 3, 0}}, {{0, 2, 1}}, {{0, 1, 2}}, {{0, 0, 3}},
}};

// Position of (a, b, c) in kIndex, or -1 when the order exceeds kMaxOrder.
constexpr int index_of(int a, int b, int c) {
  for (int i = 0; i < kMaxCoeffs; ++i)
    if (kIndex[i].n[0] == a && kIndex[i].n[1] == b && kIndex[i].n[2] == c) return i;
  return -1;
}

// sum[i][j] = index of kIndex[i] + kIndex[j], or -1.
struct SumTable {
  std::int8_t v[kMaxCoeffs][kMaxCoeffs];
};

constexpr SumTable make_sum_table() {
  SumTable t{};
  for (int i = 0; i < kMaxCoeffs; ++i)
    for (int j = 0; j < kMaxCoeffs; ++j)
      t.v[i][j] = static_cast<std::int8_t>(
          index_of(kIndex[i].n[0] + kIndex[j].n[0], kIndex[i].n[1] + kIndex[j].n[1], kIndex[i].n[2] + kIndex[j].n[2]));
  return t;
}

inline constexpr SumTable kSum = make_sum_table();

constexpr double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// 1 / n! for each multi-index.
constexpr std::array<double, kMaxCoeffs> make_inv_factorial() {
  std::array<double, kMaxCoeffs> f{};
  for (int i = 0; i < kMaxCoeffs; ++i)
    f[i] = 1.0 / (factorial(kIndex[i].n[0]) * factorial(kIndex[i].n[1]) * factorial(kIndex[i].n[2]));
  return f;
}

inline constexpr std::array<double, kMaxCoeffs> kInvFactorial = make_inv_factorial();

constexpr int order_of(int i) { return kIndex[i].order(); }
constexpr double parity_sign(int i) { return (order_of(i) & 1) ? -1.0 : 1.0; }

// x^n / n! for every multi-index up to order p.
inline void scaled_powers(const double x[3], int p, double out[kMaxCoeffs]) {
  const int count = coeff_count(p);
  for (int i = 0; i < count; ++i) {
    double v = kInvFactorial[i];
    for (int d = 0; d < 3; ++d)
      for (int e = 0; e < kIndex[i].n[d]; ++e) v *= x[d];
    out[i] = v;
  }
}

}  // namespace okt::fmm
