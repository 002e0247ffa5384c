#pragma once

#include <array>

#include "okt/fmm/multi_index.hpp"

namespace okt::fmm {

// Moments about the expansion center X: M[0] is the mass, M[1..3] vanish by
// the center-of-mass choice, M[n] = sum m (y - X)^n / n! above that.
struct CellMultipole {
  double M[kMaxCoeffs] = {};
  std::array<double, 3> X{0, 0, 0};
  double mass() const { return M[0]; }
};

// Potential coefficients per unit G about the cell's expansion center, plus
// the torque-balancing rotation field: omega is the cell's own rate, c the
// linear acceleration inherited through downward shifts.
struct CellTaylor {
  double L[kMaxCoeffs] = {};
  std::array<double, 3> omega{0, 0, 0};
  std::array<double, 3> c{0, 0, 0};
};

// D[n] = d^n (1/|R|) up to order p.
void greens_derivatives(const double R[3], int p, double D[kMaxCoeffs]);

// Which side of a canonically ordered pair the caller owns.
enum class Side { Lo, Hi };

// Point-mass pair: adds the own side's L0 and L1. Uses R = X_lo - X_hi so
// both sides share one evaluation; equal masses get bitwise opposite terms.
void point_kernel(const CellMultipole& lo, const CellMultipole& hi, Side side, CellTaylor& out);

// General pair about the two expansion centers. When `full` is set the own
// side gets every coefficient up to p and its share of the rotation field
// that cancels the pair's net torque (shared by lo and hi, identical on both
// sides); otherwise only L0 and L1.
void pair_kernel(const CellMultipole& lo, const CellMultipole& hi, Side side, bool full, int p, CellTaylor& out);

// Pieces exposed for testing.
std::array<double, 3> cell_force(const double L[kMaxCoeffs], const CellMultipole& m, int p);
std::array<double, 3> cell_spin(const double L[kMaxCoeffs], const CellMultipole& m, int p);
std::array<double, 9> inertia(const CellMultipole& m);

// Adds `parent` re-expanded about `child_X` (parent center parent_X) into
// `child`. Leaf children only need L0 and L1.
void shift_down(const CellTaylor& parent, const std::array<double, 3>& parent_X, const std::array<double, 3>& child_X,
                bool child_leaf, int p, CellTaylor& child);

}  // namespace okt::fmm
