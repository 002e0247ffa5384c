#include "okt/hydro/ppm.hpp"

#include <algorithm>
#include <cmath>

namespace okt::hydro {

namespace {

double mc_slope(double a, double b, double c) {
  const double dl = b - a, dr = c - b;
  if (dl * dr <= 0.0) return 0.0;
  const double s = dl > 0 ? 1.0 : -1.0;
  return s * std::min({2.0 * std::fabs(dl), 2.0 * std::fabs(dr), 0.5 * std::fabs(c - a)});
}

}  // namespace

void ppm_line(const double* q, int count, int ghost, double* left, double* right) {
  if (ghost < 2) throw InsufficientGhost("reconstruction needs 2 ghost cells, got " + std::to_string(ghost));
  const int g = ghost;
  auto at = [&](int i) { return q[i + g]; };
  // cells whose parabola we need: -1 .. count
  const int lo = -1, hi = count;
  const int m = hi - lo + 1;
  std::vector<double> aL(m), aR(m);
  // raw face value at face f (between f-1 and f), needs cells f-2..f+1
  auto face = [&](int f) {
    const double a = at(f - 1), b = at(f);
    double v = (7.0 * (a + b) - (at(f - 2) + at(f + 1))) / 12.0;
    return std::clamp(v, std::min(a, b), std::max(a, b));
  };
  const bool edge_plm = g < 3;
  for (int c = lo; c <= hi; ++c) {
    const int s = c - lo;
    const double a = at(c);
    if (edge_plm && (c == -1 || c == count)) {
      aL[s] = aR[s] = a;  // only one face of these cells is used, set below
      continue;
    }
    double l = face(c), r = face(c + 1);
    if ((r - a) * (a - l) <= 0.0) {
      l = r = a;
    } else {
      const double d = r - l, mid = a - 0.5 * (l + r);
      if (d * mid > d * d / 6.0)
        l = 3.0 * a - 2.0 * r;
      else if (-d * d / 6.0 > d * mid)
        r = 3.0 * a - 2.0 * l;
    }
    aL[s] = l;
    aR[s] = r;
  }
  for (int f = 0; f <= count; ++f) {
    left[f] = aR[f - 1 - lo];
    right[f] = aL[f - lo];
  }
  if (edge_plm) {
    for (int f : {0, count}) {
      left[f] = at(f - 1) + 0.5 * mc_slope(at(f - 2), at(f - 1), at(f));
      right[f] = at(f) - 0.5 * mc_slope(at(f - 1), at(f), at(f + 1));
    }
  }
}

FaceStates ppm_reconstruct(const grid::SubGrid& g, int dir, const EosParams& eos) {
  using namespace grid;
  if (g.ghost() < 2) throw InsufficientGhost("reconstruction needs 2 ghost cells, got " + std::to_string(g.ghost()));
  const int a_ax = dir == 0 ? 1 : 0, b_ax = dir == 2 ? 1 : 2;
  FaceStates fs;
  fs.dir = dir;
  fs.faces = g.dims();
  fs.faces[dir] += 1;
  const int nd = g.n(dir), na = g.n(a_ax), nb = g.n(b_ax), gh = g.ghost();
  const std::size_t total = static_cast<std::size_t>(nd + 1) * na * nb;
  fs.left.assign(total, Primitive{});
  fs.right.assign(total, Primitive{});
  constexpr int kQ = 6 + kNumFracs;  // rho v0 v1 v2 p tau X...
  const int len = nd + 2 * gh;
  std::vector<double> line(static_cast<std::size_t>(kQ) * len);
  std::vector<double> L(nd + 1), R(nd + 1);
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b) {
      for (int t = -gh; t < nd + gh; ++t) {
        int ijk[3];
        ijk[dir] = t;
        ijk[a_ax] = a;
        ijk[b_ax] = b;
        const Primitive w = to_primitive(g.state(ijk[0], ijk[1], ijk[2]), eos);
        const std::size_t o = t + gh;
        line[0 * len + o] = w.rho;
        for (int d = 0; d < 3; ++d) line[(1 + d) * len + o] = w.v[d];
        line[4 * len + o] = w.p;
        line[5 * len + o] = w.tau;
        for (int f = 0; f < kNumFracs; ++f) line[(6 + f) * len + o] = w.X[f];
      }
      for (int qv = 0; qv < kQ; ++qv) {
        ppm_line(&line[static_cast<std::size_t>(qv) * len], nd, gh, L.data(), R.data());
        for (int f = 0; f <= nd; ++f) {
          const std::size_t idx = (static_cast<std::size_t>(f) * na + a) * nb + b;
          Primitive& pl = fs.left[idx];
          Primitive& pr = fs.right[idx];
          switch (qv) {
            case 0: pl.rho = L[f]; pr.rho = R[f]; break;
            case 1: case 2: case 3: pl.v[qv - 1] = L[f]; pr.v[qv - 1] = R[f]; break;
            case 4: pl.p = L[f]; pr.p = R[f]; break;
            case 5: pl.tau = L[f]; pr.tau = R[f]; break;
            default: pl.X[qv - 6] = L[f]; pr.X[qv - 6] = R[f]; break;
          }
        }
      }
    }
  return fs;
}

}  // namespace okt::hydro
