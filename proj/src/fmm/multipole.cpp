#include "okt/fmm/multipole.hpp"

namespace okt::fmm {

std::array<double, 3> cell_center(const grid::GridConfig& cfg, const TreeKey& key, int local) {
  const int n = cfg.n;
  const int ijk[3] = {local / (n * n), (local / n) % n, local % n};
  const double h = cfg.h(key.level);
  std::array<double, 3> c;
  for (int d = 0; d < 3; ++d) c[d] = cfg.origin[d] + (static_cast<double>(key.idx[d]) * n + ijk[d] + 0.5) * h;
  return c;
}

MultipoleSet leaf_moments(const grid::SubGrid& grid, const TreeKey& key) {
  const int n = grid.n(0);
  const double vol = grid.cell_volume();
  MultipoleSet out(static_cast<std::size_t>(n) * n * n);
  std::size_t c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++c) {
        const double rho = grid.at(grid::kRho, i, j, k);
        if (rho < 0) throw NegativeDensity(key, rho);
        out[c].M[0] = rho * vol;
        out[c].X = grid.center(i, j, k);
      }
  return out;
}

MultipoleSet combine_moments(const TreeKey& key, const std::array<const MultipoleSet*, 8>& children,
                             const grid::GridConfig& cfg, int p) {
  const int n = cfg.n, half = n / 2;
  const int count = coeff_count(p);
  MultipoleSet out(static_cast<std::size_t>(n) * n * n);
  std::size_t c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++c) {
        const int node = (i / half) | ((j / half) << 1) | ((k / half) << 2);
        const MultipoleSet& ch = *children[node];
        const int bi = 2 * (i % half), bj = 2 * (j % half), bk = 2 * (k % half);
        const CellMultipole* sub[8];
        for (int o = 0; o < 8; ++o)
          sub[o] = &ch[static_cast<std::size_t>((bi + (o & 1)) * n * n + (bj + ((o >> 1) & 1)) * n + bk + ((o >> 2) & 1))];
        CellMultipole& m = out[c];
        double mass = 0.0;
        std::array<double, 3> mx{0, 0, 0};
        for (int o = 0; o < 8; ++o) {
          mass += sub[o]->M[0];
          for (int d = 0; d < 3; ++d) mx[d] += sub[o]->M[0] * sub[o]->X[d];
        }
        m.M[0] = mass;
        if (mass > 0) {
          for (int d = 0; d < 3; ++d) m.X[d] = mx[d] / mass;
        } else {
          m.X = cell_center(cfg, key, static_cast<int>(c));
        }
        for (int o = 0; o < 8; ++o) {
          const double dx[3] = {sub[o]->X[0] - m.X[0], sub[o]->X[1] - m.X[1], sub[o]->X[2] - m.X[2]};
          double pw[kMaxCoeffs];
          scaled_powers(dx, p, pw);
          for (int a = 0; a < count; ++a) {
            if (order_of(a) == 1) continue;
            const double ma = sub[o]->M[a];
            if (ma == 0.0) continue;
            for (int b = 0; b < count; ++b) {
              if (order_of(a) + order_of(b) > p || order_of(a) + order_of(b) < 2) continue;
              m.M[kSum.v[a][b]] += ma * pw[b];
            }
          }
        }
      }
  return out;
}

MultipoleTree compute_moments(const grid::Octree& tree, int p) {
  if (!tree.is_graded()) throw grid::GradednessError("fmm requires a graded tree");
  MultipoleTree mt(tree.config(), p);
  const auto& nodes = tree.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    const auto& [k, nd] = *it;
    if (nd.leaf) {
      mt.set(k, true, std::make_shared<const MultipoleSet>(leaf_moments(nd.grid, k)));
    } else {
      std::array<const MultipoleSet*, 8> ch;
      for (int c = 0; c < 8; ++c) ch[c] = mt.find(k.child(c))->mp.get();
      mt.set(k, false, std::make_shared<const MultipoleSet>(combine_moments(k, ch, tree.config(), p)));
    }
  }
  return mt;
}

}  // namespace okt::fmm
