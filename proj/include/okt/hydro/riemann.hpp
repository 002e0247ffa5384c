#pragma once

#include <vector>

namespace okt::hydro {

struct RiemannState {
  double rho, u, p;
};

// Exact solution of the 1-D Riemann problem for an ideal gas.
class ExactRiemann {
 public:
  ExactRiemann(RiemannState left, RiemannState right, double gamma);

  double p_star() const { return p_star_; }
  double u_star() const { return u_star_; }

  // State at similarity coordinate xi = (x - x0) / t.
  RiemannState sample(double xi) const;

  // Cell averages over [x0 + (i)dx, x0 + (i+1)dx] at time t, by midpoint
  // sub-sampling with `sub` points per cell.
  std::vector<RiemannState> cell_averages(double x_interface, double x0, double dx, int cells, double t,
                                          int sub = 16) const;

 private:
  double pressure_function(double p, const RiemannState& s, double c, double& deriv) const;

  RiemannState l_, r_;
  double g_;
  double cl_, cr_;
  double p_star_ = 0, u_star_ = 0;
};

}  // namespace okt::hydro
