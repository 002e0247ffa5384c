#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "okt/grid/subgrid.hpp"

namespace okt::hydro {

using grid::State;

struct EosParams {
  double gamma = 5.0 / 3.0;
  double dual_energy_eta = 1e-3;
  double rho_floor = 1e-12;
  double p_floor = 1e-12;

  void validate() const {
    if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
    if (!(dual_energy_eta > 0.0 && dual_energy_eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  }
};

// Face or cell state in primitive form; tau and the scalars are per unit mass.
struct Primitive {
  double rho = 0.0;
  std::array<double, 3> v{0, 0, 0};
  double p = 0.0;
  double tau = 0.0;
  std::array<double, grid::kNumFracs> X{};
};

struct NonPositivePressure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// tau = (rho e)^(1/gamma): advected like a density, exact for adiabatic flow.
double tau_from_internal(double rho_e, const EosParams& eos);
double internal_from_tau(double tau, const EosParams& eos);

double kinetic_energy(const State& u);

// Internal energy density chosen by the dual-energy switch: E - kinetic when
// that is at least eta * E, the tracer otherwise.
double internal_energy(const State& u, const EosParams& eos);

// Applies the switch. When the total energy is trusted, tau is rewritten from
// it; when it is not, the tracer is kept and E is left alone. Returns true if
// the tracer was selected. Idempotent.
bool select_dual_energy(State& u, const EosParams& eos);

struct FloorCounts {
  std::uint64_t rho = 0;
  std::uint64_t p = 0;
  void merge(const FloorCounts& o) {
    rho += o.rho;
    p += o.p;
  }
};

// Raises rho and p to their floors, keeping velocity; counts hits.
void apply_floors(State& u, const EosParams& eos, FloorCounts& counts);

Primitive to_primitive(const State& u, const EosParams& eos);
State to_conserved(const Primitive& w, const EosParams& eos);

double sound_speed(double rho, double p, const EosParams& eos);

}  // namespace okt::hydro
