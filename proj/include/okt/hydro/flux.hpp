#pragma once

#include "okt/hydro/eos.hpp"

namespace okt::hydro {

// Physical flux of the conserved state along `dir`.
State physical_flux(const Primitive& w, int dir, const EosParams& eos);

// Local Lax-Friedrichs (Rusanov) flux with a = max(|v_dir| + c_s) over both
// states. Scalar mass fractions are renormalized per side so the scalar
// fluxes add up to the mass flux. Throws NonPositivePressure.
State central_flux(const Primitive& left, const Primitive& right, int dir, const EosParams& eos,
                   double* signal_speed = nullptr);

}  // namespace okt::hydro
