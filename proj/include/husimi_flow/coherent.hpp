#pragma once

#include <complex>

#include "husimi_flow/config.hpp"

namespace husimi_flow {

using complex = std::complex<double>;

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

// Coherent states are labelled by the eigenvalue z of the annihilation
// operator a = x/(2 sx) + i p/(2 sp), so that [a, a+] = 1 and
//   x = sx (z + conj z),   p = i sp (conj z - z).
// With this normalisation |<z|z0>|^2 = exp(-|z - z0|^2) and the phase-space
// measure is d^2z = dx dp / (2 pi hbar).

complex z_from_xp(double x, double p, const PhaseSpaceConfig& cfg);
PhasePoint xp_from_z(complex z, const PhaseSpaceConfig& cfg);

/// <x|z> = (2 pi sx^2)^(-1/4) exp(-x^2/(4 sx^2) + z x/sx - z^2/2 - |z|^2/2).
///
/// This phase choice makes theta(conj z) = e^{|z|^2/2} <z|psi> an entire
/// function of conj z, real and positive for the oscillator ground state at
/// z = 0. Evaluated in the overflow-free form
///   (2 pi sx^2)^(-1/4) exp(-(x - xc)^2/(4 sx^2)) exp(i (pc x/hbar - Re z Im z)).
complex coherent_kernel(complex z, double x, const PhaseSpaceConfig& cfg);

/// Husimi density of the coherent state |z0>: exp(-|z - z0|^2).
double coherent_husimi(complex z, complex z0);

}  // namespace husimi_flow
