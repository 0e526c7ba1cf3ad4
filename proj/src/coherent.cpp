#include "husimi_flow/coherent.hpp"

#include <cmath>
#include <numbers>

namespace husimi_flow {

complex z_from_xp(double x, double p, const PhaseSpaceConfig& cfg) {
  return {x / (2.0 * cfg.sigma_x()), p / (2.0 * cfg.sigma_p())};
}

PhasePoint xp_from_z(complex z, const PhaseSpaceConfig& cfg) {
  return {2.0 * cfg.sigma_x() * z.real(), 2.0 * cfg.sigma_p() * z.imag()};
}

complex coherent_kernel(complex z, double x, const PhaseSpaceConfig& cfg) {
  const double sx = cfg.sigma_x();
  const auto [xc, pc] = xp_from_z(z, cfg);
  const double norm = std::pow(2.0 * std::numbers::pi * sx * sx, -0.25);
  const double u = (x - xc) / sx;
  return std::polar(norm * std::exp(-0.25 * u * u), pc * x / cfg.hbar - z.real() * z.imag());
}

double coherent_husimi(complex z, complex z0) { return std::exp(-std::norm(z - z0)); }

}  // namespace husimi_flow
