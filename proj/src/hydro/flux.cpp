#include "okt/hydro/flux.hpp"

#include <algorithm>
#include <cmath>

namespace okt::hydro {

using namespace grid;

namespace {

Primitive normalized(const Primitive& w) {
  Primitive o = w;
  double s = 0.0;
  for (double x : w.X) s += x;
  if (s > 0)
    for (double& x : o.X) x /= s;
  return o;
}

}  // namespace

State physical_flux(const Primitive& w, int dir, const EosParams& eos) {
  State f{};
  const double vn = w.v[dir];
  const double mass = w.rho * vn;
  f[kRho] = mass;
  for (int d = 0; d < 3; ++d) f[kSx + d] = mass * w.v[d];
  f[kSx + dir] += w.p;
  const double E = w.p / (eos.gamma - 1.0) + 0.5 * w.rho * (w.v[0] * w.v[0] + w.v[1] * w.v[1] + w.v[2] * w.v[2]);
  f[kEgas] = (E + w.p) * vn;
  f[kTau] = mass * w.tau;
  for (int i = 0; i < kNumFracs; ++i) f[kFrac0 + i] = mass * w.X[i];
  return f;
}

State central_flux(const Primitive& left, const Primitive& right, int dir, const EosParams& eos,
                   double* signal_speed) {
  if (!(left.p > 0.0) || !(right.p > 0.0) || !(left.rho > 0.0) || !(right.rho > 0.0))
    throw NonPositivePressure("non-positive face state: rho " + std::to_string(left.rho) + "|" +
                              std::to_string(right.rho) + ", p " + std::to_string(left.p) + "|" +
                              std::to_string(right.p));
  const Primitive l = normalized(left), r = normalized(right);
  const double a = std::max(std::fabs(l.v[dir]) + sound_speed(l.rho, l.p, eos),
                            std::fabs(r.v[dir]) + sound_speed(r.rho, r.p, eos));
  if (signal_speed) *signal_speed = a;
  const State fl = physical_flux(l, dir, eos), fr = physical_flux(r, dir, eos);
  const State ul = to_conserved(l, eos), ur = to_conserved(r, eos);
  State f;
  for (int q = 0; q < kNumFields; ++q) f[q] = 0.5 * (fl[q] + fr[q]) - 0.5 * a * (ur[q] - ul[q]);
  return f;
}

}  // namespace okt::hydro
