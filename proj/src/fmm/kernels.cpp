#include "okt/fmm/kernels.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace okt::fmm {

namespace {

struct Term {
  std::int8_t k, n, kn;
};

// (k, n) pairs with |k| + |n| <= p, skipping first-order moments (always 0).
struct TermTable {
  std::vector<Term> all;
  std::vector<Term> low;  // |k| <= 1
  explicit TermTable(int p) {
    const int count = coeff_count(p);
    for (int k = 0; k < count; ++k)
      for (int n = 0; n < count; ++n) {
        if (order_of(n) == 1 || order_of(k) + order_of(n) > p) continue;
        const Term t{static_cast<std::int8_t>(k), static_cast<std::int8_t>(n), kSum.v[k][n]};
        all.push_back(t);
        if (order_of(k) <= 1) low.push_back(t);
      }
  }
};

const TermTable& terms(int p) {
  static const TermTable t2(2), t3(3);
  return p == 2 ? t2 : t3;
}

constexpr int e(int a) { return 1 + a; }

// L_lo[k] = -sum (-1)^|n| M_hi[n] D[k+n]
void expand_lo(const std::vector<Term>& ts, const CellMultipole& hi, const double D[], double L[]) {
  for (const auto& t : ts) L[t.k] -= parity_sign(t.n) * hi.M[t.n] * D[t.kn];
}

// L_hi[k] = -(-1)^|k| sum M_lo[n] D[k+n]
void expand_hi(const std::vector<Term>& ts, const CellMultipole& lo, const double D[], double L[]) {
  for (const auto& t : ts) L[t.k] -= parity_sign(t.k) * lo.M[t.n] * D[t.kn];
}

std::array<double, 3> solve_rotation(const std::array<double, 9>& J, const std::array<double, 3>& tau) {
  const double a = J[0], b = J[1], c = J[2], d = J[4], e2 = J[5], f = J[8];
  const double c00 = d * f - e2 * e2, c01 = c * e2 - b * f, c02 = b * e2 - c * d;
  const double det = a * c00 + b * c01 + c * c02;
  const double scale = std::fabs(a) + std::fabs(d) + std::fabs(f);
  if (scale > 0 && std::fabs(det) > 1e-10 * scale * scale * scale) {
    const double c11 = a * f - c * c, c12 = b * c - a * e2, c22 = a * d - b * b;
    const double inv = 1.0 / det;
    return {-(c00 * tau[0] + c01 * tau[1] + c02 * tau[2]) * inv, -(c01 * tau[0] + c11 * tau[1] + c12 * tau[2]) * inv,
            -(c02 * tau[0] + c12 * tau[1] + c22 * tau[2]) * inv};
  }
  if (!(scale > 0)) return {0, 0, 0};
  // Degenerate mass distributions (all mass on a line): least-norm solution.
  Eigen::Matrix3d m;
  m << J[0], J[1], J[2], J[3], J[4], J[5], J[6], J[7], J[8];
  const Eigen::Vector3d t(tau[0], tau[1], tau[2]);
  const Eigen::Vector3d w = -m.completeOrthogonalDecomposition().solve(t);
  return {w[0], w[1], w[2]};
}

}  // namespace

void greens_derivatives(const double R[3], int p, double D[kMaxCoeffs]) {
  const double r2 = R[0] * R[0] + R[1] * R[1] + R[2] * R[2];
  const double inv_r2 = 1.0 / r2;
  const double d0 = std::sqrt(inv_r2);
  const double d1 = -d0 * inv_r2;
  const double d2 = -3.0 * d1 * inv_r2;
  const double x = R[0], y = R[1], z = R[2];
  D[0] = d0;
  D[1] = x * d1;
  D[2] = y * d1;
  D[3] = z * d1;
  if (p < 2) return;
  D[4] = x * x * d2 + d1;
  D[5] = x * y * d2;
  D[6] = x * z * d2;
  D[7] = y * y * d2 + d1;
  D[8] = y * z * d2;
  D[9] = z * z * d2 + d1;
  if (p < 3) return;
  const double d3 = -5.0 * d2 * inv_r2;
  D[10] = x * x * x * d3 + 3 * x * d2;
  D[11] = x * x * y * d3 + y * d2;
  D[12] = x * x * z * d3 + z * d2;
  D[13] = x * y * y * d3 + x * d2;
  D[14] = x * y * z * d3;
  D[15] = x * z * z * d3 + x * d2;
  D[16] = y * y * y * d3 + 3 * y * d2;
  D[17] = y * y * z * d3 + z * d2;
  D[18] = y * z * z * d3 + y * d2;
  D[19] = z * z * z * d3 + 3 * z * d2;
}

void point_kernel(const CellMultipole& lo, const CellMultipole& hi, Side side, CellTaylor& out) {
  const double R[3] = {lo.X[0] - hi.X[0], lo.X[1] - hi.X[1], lo.X[2] - hi.X[2]};
  const double r2 = R[0] * R[0] + R[1] * R[1] + R[2] * R[2];
  const double inv_r = 1.0 / std::sqrt(r2);
  const double inv_r3 = inv_r * inv_r * inv_r;
  const double t[3] = {R[0] * inv_r3, R[1] * inv_r3, R[2] * inv_r3};
  if (side == Side::Lo) {
    const double m = hi.M[0];
    out.L[0] -= m * inv_r;
    for (int a = 0; a < 3; ++a) out.L[e(a)] += m * t[a];
  } else {
    const double m = lo.M[0];
    out.L[0] -= m * inv_r;
    for (int a = 0; a < 3; ++a) out.L[e(a)] -= m * t[a];
  }
}

std::array<double, 3> cell_force(const double L[kMaxCoeffs], const CellMultipole& m, int p) {
  std::array<double, 3> F{0, 0, 0};
  const int count = coeff_count(p - 1);
  for (int k = 0; k < count; ++k) {
    if (order_of(k) == 1) continue;
    for (int a = 0; a < 3; ++a) F[a] -= L[kSum.v[k][e(a)]] * m.M[k];
  }
  return F;
}

std::array<double, 3> cell_spin(const double L[kMaxCoeffs], const CellMultipole& m, int p) {
  std::array<double, 3> s{0, 0, 0};
  const int count = coeff_count(p - 1);
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    double acc = 0.0;
    for (int k = 0; k < count; ++k) {
      acc += L[kSum.v[k][e(c)]] * (kIndex[k].n[b] + 1) * m.M[kSum.v[k][e(b)]];
      acc -= L[kSum.v[k][e(b)]] * (kIndex[k].n[c] + 1) * m.M[kSum.v[k][e(c)]];
    }
    s[a] = -acc;
  }
  return s;
}

std::array<double, 9> inertia(const CellMultipole& m) {
  const double xx = m.M[4], xy = m.M[5], xz = m.M[6], yy = m.M[7], yz = m.M[8], zz = m.M[9];
  return {2 * (yy + zz), -xy, -xz, -xy, 2 * (xx + zz), -yz, -xz, -yz, 2 * (xx + yy)};
}

void pair_kernel(const CellMultipole& lo, const CellMultipole& hi, Side side, bool full, int p, CellTaylor& out) {
  const double R[3] = {lo.X[0] - hi.X[0], lo.X[1] - hi.X[1], lo.X[2] - hi.X[2]};
  double D[kMaxCoeffs];
  greens_derivatives(R, p, D);
  const TermTable& tt = terms(p);
  if (!full) {
    if (side == Side::Lo)
      expand_lo(tt.low, hi, D, out.L);
    else
      expand_hi(tt.low, lo, D, out.L);
    return;
  }
  double Llo[kMaxCoeffs] = {}, Lhi[kMaxCoeffs] = {};
  expand_lo(tt.all, hi, D, Llo);
  expand_hi(tt.all, lo, D, Lhi);
  const auto F = cell_force(Llo, lo, p);
  const auto slo = cell_spin(Llo, lo, p);
  const auto shi = cell_spin(Lhi, hi, p);
  const std::array<double, 3> tau{R[1] * F[2] - R[2] * F[1] + slo[0] + shi[0],
                                  R[2] * F[0] - R[0] * F[2] + slo[1] + shi[1],
                                  R[0] * F[1] - R[1] * F[0] + slo[2] + shi[2]};
  const auto Jlo = inertia(lo), Jhi = inertia(hi);
  std::array<double, 9> J;
  for (int i = 0; i < 9; ++i) J[i] = Jlo[i] + Jhi[i];
  const auto w = solve_rotation(J, tau);
  const double* own = side == Side::Lo ? Llo : Lhi;
  const int count = coeff_count(p);
  for (int i = 0; i < count; ++i) out.L[i] += own[i];
  for (int a = 0; a < 3; ++a) out.omega[a] += w[a];
}

void shift_down(const CellTaylor& parent, const std::array<double, 3>& parent_X, const std::array<double, 3>& child_X,
                bool child_leaf, int p, CellTaylor& child) {
  const double dx[3] = {child_X[0] - parent_X[0], child_X[1] - parent_X[1], child_X[2] - parent_X[2]};
  double pw[kMaxCoeffs];
  scaled_powers(dx, p, pw);
  const int count = coeff_count(child_leaf ? 1 : p);
  const int all = coeff_count(p);
  for (int k = 0; k < count; ++k) {
    double acc = 0.0;
    for (int j = 0; j < all; ++j) {
      if (order_of(k) + order_of(j) > p) continue;
      acc += parent.L[kSum.v[k][j]] * pw[j];
    }
    child.L[k] += acc;
  }
  const auto& w = parent.omega;
  child.c[0] += parent.c[0] + (w[1] * dx[2] - w[2] * dx[1]);
  child.c[1] += parent.c[1] + (w[2] * dx[0] - w[0] * dx[2]);
  child.c[2] += parent.c[2] + (w[0] * dx[1] - w[1] * dx[0]);
  if (!child_leaf)
    for (int a = 0; a < 3; ++a) child.omega[a] += w[a];
}

}  // namespace okt::fmm
