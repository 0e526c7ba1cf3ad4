#include "husimi_flow/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "husimi_flow/coherent.hpp"

namespace husimi_flow {

AveragedHamiltonian::AveragedHamiltonian(const PhaseSpaceConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const double sx = cfg_.sigma_x();
  if (cfg_.potential == PotentialKind::gaussian_barrier) {
    alpha_ = 1.0 / std::sqrt(1.0 + 2.0 * cfg_.k * sx * sx);
    beta_ = alpha_ * alpha_ * cfg_.k;
  }
  max_order_ = 2 * (cfg_.trunc_order + 1);
}

double AveragedHamiltonian::value_xp(double x, double p) const {
  const double sp = cfg_.sigma_p();
  const double kinetic = (p * p + sp * sp) / (2.0 * cfg_.mass);
  switch (cfg_.potential) {
    case PotentialKind::gaussian_barrier: return kinetic + alpha_ * cfg_.v0 * std::exp(-beta_ * x * x);
    case PotentialKind::free: return kinetic;
    case PotentialKind::harmonic: {
      const complex z = z_from_xp(x, p, cfg_);
      return cfg_.hbar * cfg_.omega * (std::norm(z) + 0.5);
    }
  }
  return kinetic;
}

double AveragedHamiltonian::value(complex z) const {
  const auto [x, p] = xp_from_z(z, cfg_);
  return value_xp(x, p);
}

complex AveragedHamiltonian::kinetic_partial(complex z, int a, int b) const {
  // p^2/2m = -c (conj z - z)^2 with c = sp^2/2m.
  const double sp = cfg_.sigma_p();
  const double c = sp * sp / (2.0 * cfg_.mass);
  const complex d = std::conj(z) - z;
  if (a + b > 2) return 0.0;
  if (a + b == 0) return -c * d * d + c;
  if (a + b == 1) return a == 1 ? -2.0 * c * d : 2.0 * c * d;
  return a == 1 ? 2.0 * c : -2.0 * c;
}

PotentialDerivatives AveragedHamiltonian::potential_derivatives(double x, int max_total_order) const {
  PotentialDerivatives table;
  table.x = x;
  table.scaled.assign(static_cast<std::size_t>(max_total_order) + 1, 0.0);
  if (cfg_.potential != PotentialKind::gaussian_barrier) return table;
  // d^n/dx^n exp(-beta x^2) = (-sqrt(beta))^n H_n(sqrt(beta) x) exp(-beta x^2);
  // the recurrence runs on Hermite values already multiplied by the Gaussian.
  const double sx = cfg_.sigma_x();
  const double rb = std::sqrt(beta_);
  const double y = rb * x;
  const double step = -sx * rb;
  double h_prev = 0.0;
  double h = alpha_ * cfg_.v0 * std::exp(-y * y);
  double scale = 1.0;
  for (int n = 0; n <= max_total_order; ++n) {
    table.scaled[n] = scale * h;
    const double h_next = 2.0 * y * h - 2.0 * n * h_prev;
    h_prev = h;
    h = h_next;
    scale *= step;
  }
  return table;
}

complex AveragedHamiltonian::mixed_partial(complex z, int a, int b) const {
  if (a + b > max_order_) {
    throw std::out_of_range("mixed_partial: order " + std::to_string(a + b) + " beyond supported " +
                            std::to_string(max_order_));
  }
  const auto [x, p] = xp_from_z(z, cfg_);
  return mixed_partial(z, a, b, potential_derivatives(x, a + b));
}

complex AveragedHamiltonian::mixed_partial(complex z, int a, int b, const PotentialDerivatives& table) const {
  if (a < 0 || b < 0) throw std::out_of_range("mixed_partial: negative order");
  if (a + b > max_order_ || a + b >= static_cast<int>(table.scaled.size())) {
    throw std::out_of_range("mixed_partial: order " + std::to_string(a + b) + " beyond supported table");
  }
  if (cfg_.potential == PotentialKind::harmonic) {
    const double e = cfg_.hbar * cfg_.omega;
    if (a == 0 && b == 0) return value(z);
    if (a == 1 && b == 0) return e * z;
    if (a == 0 && b == 1) return e * std::conj(z);
    if (a == 1 && b == 1) return e;
    return 0.0;
  }
  return kinetic_partial(z, a, b) + table.scaled[static_cast<std::size_t>(a + b)];
}

}  // namespace husimi_flow
