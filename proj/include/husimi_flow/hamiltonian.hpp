#pragma once

#include <complex>
#include <vector>

#include "husimi_flow/config.hpp"

namespace husimi_flow {

using complex = std::complex<double>;

/// Potential part of the averaged Hamiltonian at a fixed x, differentiated
/// along the conj(z) + z direction: entry n holds sx^n U^(n)(x).
struct PotentialDerivatives {
  double x = 0.0;
  std::vector<double> scaled;
};

/// Coherent-state average H(conj z, z) = <z|H|z> of the propagated
/// Hamiltonian, with exact mixed partials d^(a+b) H / d(conj z)^a dz^b.
///
/// Gaussian barrier:  H = p^2/2m + hbar omega/4 + alpha V0 exp(-alpha^2 k x^2),
///                    alpha = (1 + 2 k sx^2)^(-1/2)
/// Free particle:     H = p^2/2m + hbar omega/4
/// Harmonic (same omega as the coherent basis): H = hbar omega (|z|^2 + 1/2)
class AveragedHamiltonian {
 public:
  explicit AveragedHamiltonian(const PhaseSpaceConfig& cfg);

  const PhaseSpaceConfig& config() const { return cfg_; }
  double alpha() const { return alpha_; }
  /// Highest total derivative order the current expansion of cfg requests.
  int max_order() const { return max_order_; }

  double value(complex z) const;
  double value_xp(double x, double p) const;

  /// Throws std::out_of_range when a + b exceeds max_order().
  complex mixed_partial(complex z, int a, int b) const;
  /// Same, reusing potential derivatives tabulated for x = x(z).
  complex mixed_partial(complex z, int a, int b, const PotentialDerivatives& table) const;

  /// Tabulates sx^n U^(n)(x) for n = 0..max_total_order.
  PotentialDerivatives potential_derivatives(double x, int max_total_order) const;

 private:
  complex kinetic_partial(complex z, int a, int b) const;

  PhaseSpaceConfig cfg_;
  double alpha_ = 1.0;
  double beta_ = 0.0;
  int max_order_ = 2;
};

}  // namespace husimi_flow
