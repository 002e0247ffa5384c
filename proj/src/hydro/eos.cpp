#include "okt/hydro/eos.hpp"

#include <cmath>

namespace okt::hydro {

using namespace grid;

double tau_from_internal(double rho_e, const EosParams& eos) { return std::pow(rho_e, 1.0 / eos.gamma); }
double internal_from_tau(double tau, const EosParams& eos) { return std::pow(tau, eos.gamma); }

double kinetic_energy(const State& u) {
  return 0.5 * (u[kSx] * u[kSx] + u[kSy] * u[kSy] + u[kSz] * u[kSz]) / u[kRho];
}

double internal_energy(const State& u, const EosParams& eos) {
  const double e = u[kEgas] - kinetic_energy(u);
  if (e >= eos.dual_energy_eta * u[kEgas]) return e;
  return internal_from_tau(u[kTau], eos);
}

bool select_dual_energy(State& u, const EosParams& eos) {
  const double e = u[kEgas] - kinetic_energy(u);
  if (e >= eos.dual_energy_eta * u[kEgas]) {
    u[kTau] = tau_from_internal(e, eos);
    return false;
  }
  return true;
}

void apply_floors(State& u, const EosParams& eos, FloorCounts& counts) {
  if (!(u[kRho] >= eos.rho_floor)) {
    const double old = u[kRho];
    u[kRho] = eos.rho_floor;
    // keep velocity and mass fractions
    const double r = old > 0 ? eos.rho_floor / old : 0.0;
    for (int d = 0; d < 3; ++d) u[kSx + d] *= r;
    for (int f = 0; f < kNumFracs; ++f) u[kFrac0 + f] = old > 0 ? u[kFrac0 + f] * r : eos.rho_floor / kNumFracs;
    ++counts.rho;
  }
  const double emin = eos.p_floor / (eos.gamma - 1.0);
  const double e = internal_energy(u, eos);
  if (!(e >= emin)) {
    u[kEgas] = kinetic_energy(u) + emin;
    u[kTau] = tau_from_internal(emin, eos);
    ++counts.p;
  }
}

Primitive to_primitive(const State& u, const EosParams& eos) {
  Primitive w;
  w.rho = u[kRho];
  const double inv = 1.0 / u[kRho];
  for (int d = 0; d < 3; ++d) w.v[d] = u[kSx + d] * inv;
  w.p = (eos.gamma - 1.0) * internal_energy(u, eos);
  w.tau = u[kTau] * inv;
  for (int f = 0; f < kNumFracs; ++f) w.X[f] = u[kFrac0 + f] * inv;
  return w;
}

State to_conserved(const Primitive& w, const EosParams& eos) {
  State u{};
  u[kRho] = w.rho;
  for (int d = 0; d < 3; ++d) u[kSx + d] = w.rho * w.v[d];
  u[kEgas] = w.p / (eos.gamma - 1.0) + 0.5 * w.rho * (w.v[0] * w.v[0] + w.v[1] * w.v[1] + w.v[2] * w.v[2]);
  u[kTau] = w.rho * w.tau;
  for (int f = 0; f < kNumFracs; ++f) u[kFrac0 + f] = w.rho * w.X[f];
  return u;
}

double sound_speed(double rho, double p, const EosParams& eos) { return std::sqrt(eos.gamma * p / rho); }

}  // namespace okt::hydro
