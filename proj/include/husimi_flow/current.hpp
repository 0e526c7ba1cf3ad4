#pragma once

#include <complex>
#include <vector>

#include "husimi_flow/hamiltonian.hpp"
#include "husimi_flow/husimi.hpp"

namespace husimi_flow {

using complex = std::complex<double>;

/// Quantum current J on a window, truncated at hbar order N (all terms with
/// l + k <= N + 1 of the resummed series). J = amplitude * reduced, where the
/// reduced factor is f rescaled by e^{|z|^2/2} and does not vanish at Husimi
/// zeros.
struct CurrentField {
  PhaseSpaceWindow window;
  double time = 0.0;
  int order = 0;
  std::vector<complex> j;
  std::vector<complex> reduced;
  /// components[n][node] = contribution of order hbar^n; empty unless requested.
  std::vector<std::vector<complex>> components;

  double max_abs() const;
};

/// Nodewise evaluation of the truncated current. `q_derivs[m]` holds
/// d^m Q/dz^m for m = 0..order (entry 0 is Q itself).
struct CurrentTerms {
  complex j;
  complex reduced;
};
CurrentTerms current_at_node(complex z, double q, complex amplitude, const complex* reduced_stack, int order,
                             const AveragedHamiltonian& h, const PotentialDerivatives& table,
                             complex* components = nullptr);

/// J_cl = Q dH/d(conj z) / (i hbar).
CurrentField classical_current(const HusimiField& field, const AveragedHamiltonian& h);

/// Requires field.order >= order; throws std::invalid_argument otherwise.
CurrentField quantum_current(const HusimiField& field, const AveragedHamiltonian& h, int order,
                             bool keep_components = false);

/// Pointwise current evaluator built on an exact Husimi sampler.
class CurrentSampler {
 public:
  CurrentSampler(std::shared_ptr<const HusimiSampler> sampler, AveragedHamiltonian h, int order);

  CurrentTerms evaluate(complex z) const;
  complex current(complex z) const { return evaluate(z).j; }
  complex reduced(complex z) const { return evaluate(z).reduced; }
  int order() const { return order_; }
  const HusimiSampler& husimi() const { return *sampler_; }
  const AveragedHamiltonian& hamiltonian() const { return h_; }

 private:
  std::shared_ptr<const HusimiSampler> sampler_;
  AveragedHamiltonian h_;
  int order_;
};

struct ContinuityResidual {
  PhaseSpaceWindow window;
  /// Interior nodes only (4 nodes from each edge); border entries are 0.
  std::vector<double> residual;
  std::vector<double> dq_dt;
  std::vector<double> divergence;
  double norm = 0.0;
  double dq_dt_norm = 0.0;
  double divergence_norm = 0.0;
};

/// r = dQ/dt + dJ/dz + d(conj J)/d(conj z); dQ/dt by central difference of
/// fields at t - dt and t + dt, divergence by 8th-order central stencils in
/// (x, p). Norms are discrete L2 over the interior.
ContinuityResidual continuity_residual(const HusimiField& before, const HusimiField& now,
                                       const HusimiField& after, const CurrentField& current, double dt);

}  // namespace husimi_flow
