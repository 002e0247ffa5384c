#include "okt/hydro/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace okt::hydro {

ExactRiemann::ExactRiemann(RiemannState left, RiemannState right, double gamma) : l_(left), r_(right), g_(gamma) {
  cl_ = std::sqrt(g_ * l_.p / l_.rho);
  cr_ = std::sqrt(g_ * r_.p / r_.rho);
  if (2.0 / (g_ - 1.0) * (cl_ + cr_) <= r_.u - l_.u) throw std::domain_error("riemann: vacuum is generated");
  double p = std::max(1e-12, 0.5 * (l_.p + r_.p) - 0.125 * (r_.u - l_.u) * (l_.rho + r_.rho) * (cl_ + cr_));
  for (int it = 0; it < 100; ++it) {
    double dl, dr;
    const double fl = pressure_function(p, l_, cl_, dl);
    const double fr = pressure_function(p, r_, cr_, dr);
    const double next = std::max(1e-14, p - (fl + fr + r_.u - l_.u) / (dl + dr));
    const double change = 2.0 * std::fabs(next - p) / (next + p);
    p = next;
    if (change < 1e-15) break;
  }
  p_star_ = p;
  double dl, dr;
  u_star_ = 0.5 * (l_.u + r_.u) + 0.5 * (pressure_function(p, r_, cr_, dr) - pressure_function(p, l_, cl_, dl));
}

double ExactRiemann::pressure_function(double p, const RiemannState& s, double c, double& deriv) const {
  if (p > s.p) {
    const double A = 2.0 / ((g_ + 1.0) * s.rho), B = (g_ - 1.0) / (g_ + 1.0) * s.p;
    const double q = std::sqrt(A / (p + B));
    deriv = q * (1.0 - 0.5 * (p - s.p) / (B + p));
    return (p - s.p) * q;
  }
  const double e = (g_ - 1.0) / (2.0 * g_);
  deriv = 1.0 / (s.rho * c) * std::pow(p / s.p, -(g_ + 1.0) / (2.0 * g_));
  return 2.0 * c / (g_ - 1.0) * (std::pow(p / s.p, e) - 1.0);
}

RiemannState ExactRiemann::sample(double xi) const {
  const double g = g_;
  const double gm = (g - 1.0) / (g + 1.0);
  if (xi <= u_star_) {
    const RiemannState& s = l_;
    const double c = cl_;
    if (p_star_ > s.p) {
      const double shock = s.u - c * std::sqrt((g + 1.0) / (2.0 * g) * p_star_ / s.p + (g - 1.0) / (2.0 * g));
      if (xi <= shock) return s;
      return {s.rho * (p_star_ / s.p + gm) / (gm * p_star_ / s.p + 1.0), u_star_, p_star_};
    }
    const double head = s.u - c;
    if (xi <= head) return s;
    const double cs = c * std::pow(p_star_ / s.p, (g - 1.0) / (2.0 * g));
    const double tail = u_star_ - cs;
    if (xi >= tail) return {s.rho * std::pow(p_star_ / s.p, 1.0 / g), u_star_, p_star_};
    const double base = 2.0 / (g + 1.0) + gm / c * (s.u - xi);
    return {s.rho * std::pow(base, 2.0 / (g - 1.0)), 2.0 / (g + 1.0) * (c + (g - 1.0) / 2.0 * s.u + xi),
            s.p * std::pow(base, 2.0 * g / (g - 1.0))};
  }
  const RiemannState& s = r_;
  const double c = cr_;
  if (p_star_ > s.p) {
    const double shock = s.u + c * std::sqrt((g + 1.0) / (2.0 * g) * p_star_ / s.p + (g - 1.0) / (2.0 * g));
    if (xi >= shock) return s;
    return {s.rho * (p_star_ / s.p + gm) / (gm * p_star_ / s.p + 1.0), u_star_, p_star_};
  }
  const double head = s.u + c;
  if (xi >= head) return s;
  const double cs = c * std::pow(p_star_ / s.p, (g - 1.0) / (2.0 * g));
  const double tail = u_star_ + cs;
  if (xi <= tail) return {s.rho * std::pow(p_star_ / s.p, 1.0 / g), u_star_, p_star_};
  const double base = 2.0 / (g + 1.0) - gm / c * (s.u - xi);
  return {s.rho * std::pow(base, 2.0 / (g - 1.0)), 2.0 / (g + 1.0) * (-c + (g - 1.0) / 2.0 * s.u + xi),
          s.p * std::pow(base, 2.0 * g / (g - 1.0))};
}

std::vector<RiemannState> ExactRiemann::cell_averages(double x_interface, double x0, double dx, int cells, double t,
                                                      int sub) const {
  std::vector<RiemannState> out(cells);
  for (int i = 0; i < cells; ++i) {
    RiemannState acc{0, 0, 0};
    for (int s = 0; s < sub; ++s) {
      const double x = x0 + (i + (s + 0.5) / sub) * dx;
      const RiemannState w = sample((x - x_interface) / t);
      acc.rho += w.rho;
      acc.u += w.u;
      acc.p += w.p;
    }
    out[i] = {acc.rho / sub, acc.u / sub, acc.p / sub};
  }
  return out;
}

}  // namespace okt::hydro
