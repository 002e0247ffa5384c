#include "okt/grid/refine.hpp"

#include <cmath>
#include <stdexcept>

namespace okt::grid {

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::fabs(a) < std::fabs(b) ? a : b;
}

State prolong_cell(const SubGrid& c, int i, int j, int k, const std::array<int, 3>& sign, int reach) {
  const int pos[3] = {i, j, k};
  bool has_lo[3], has_hi[3];
  for (int d = 0; d < 3; ++d) {
    has_lo[d] = pos[d] - 1 >= -reach;
    has_hi[d] = pos[d] + 1 < c.n(d) + reach;
  }
  auto value = [&](int f) {
    const double v = c.at(f, i, j, k);
    double corr = 0.0;
    for (int d = 0; d < 3; ++d) {
      if (!has_lo[d] || !has_hi[d]) continue;
      const int e[3] = {d == 0, d == 1, d == 2};
      const double up = c.at(f, i + e[0], j + e[1], k + e[2]) - v;
      const double dn = v - c.at(f, i - e[0], j - e[1], k - e[2]);
      corr += 0.25 * sign[d] * minmod(up, dn);
    }
    return v + corr;
  };
  State s;
  for (int f = 0; f < kFrac0; ++f) s[f] = value(f);
  const double rho_c = c.at(kRho, i, j, k);
  for (int f = kFrac0; f < kNumFields; ++f) {
    s[f] = rho_c != 0.0 ? (c.at(f, i, j, k) / rho_c) * s[kRho] : value(f);
  }
  return s;
}

std::array<SubGrid, 8> refine_subgrid(const SubGrid& parent) {
  const auto& dims = parent.dims();
  if (dims[0] != dims[1] || dims[1] != dims[2] || dims[0] % 2 != 0)
    throw std::invalid_argument("refine_subgrid needs an even cubic block");
  const int n = dims[0], half = n / 2;
  const double hc = parent.h() / 2;
  const int reach = parent.ghost() > 0 ? 1 : 0;
  std::array<SubGrid, 8> out;
  for (int c = 0; c < 8; ++c) {
    const int ox = c & 1, oy = (c >> 1) & 1, oz = (c >> 2) & 1;
    const auto& po = parent.origin();
    std::array<double, 3> org{po[0] + (ox * half - 0.25) * parent.h(), po[1] + (oy * half - 0.25) * parent.h(),
                              po[2] + (oz * half - 0.25) * parent.h()};
    out[c] = SubGrid::cube(n, parent.ghost(), hc, org, parent.level() + 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const int pi = ox * half + i / 2, pj = oy * half + j / 2, pk = oz * half + k / 2;
          const std::array<int, 3> sgn{(i & 1) ? 1 : -1, (j & 1) ? 1 : -1, (k & 1) ? 1 : -1};
          out[c].set_state(i, j, k, prolong_cell(parent, pi, pj, pk, sgn, reach));
        }
  }
  return out;
}

void restrict_into(SubGrid& p, const SubGrid* const ch[8]) {
  const int n = p.n(0), half = n / 2;
  for (int f = 0; f < kNumFields; ++f)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const SubGrid& g = *ch[(i / half) | ((j / half) << 1) | ((k / half) << 2)];
          const int fi = 2 * (i % half), fj = 2 * (j % half), fk = 2 * (k % half);
          const double s = ((g.at(f, fi, fj, fk) + g.at(f, fi + 1, fj, fk)) +
                            (g.at(f, fi, fj + 1, fk) + g.at(f, fi + 1, fj + 1, fk))) +
                           ((g.at(f, fi, fj, fk + 1) + g.at(f, fi + 1, fj, fk + 1)) +
                            (g.at(f, fi, fj + 1, fk + 1) + g.at(f, fi + 1, fj + 1, fk + 1)));
          p.at(f, i, j, k) = 0.125 * s;
        }
}

SubGrid restrict_children(const std::array<SubGrid, 8>& children, const SubGrid& like) {
  SubGrid p = like;
  const SubGrid* ch[8];
  for (int c = 0; c < 8; ++c) ch[c] = &children[c];
  restrict_into(p, ch);
  return p;
}

}  // namespace okt::grid
