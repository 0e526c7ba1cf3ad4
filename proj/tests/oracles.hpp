#pragma once

// Reference formulas written independently of the library.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using complex = std::complex<double>;

struct Widths {
  double sx;
  double sp;
};

inline Widths widths(double hbar, double m, double w) {
  return {std::sqrt(hbar / (2.0 * m * w)), std::sqrt(hbar * m * w / 2.0)};
}

// Minimum-uncertainty packet centred at (xc, pc), global phase ignored.
inline complex gaussian_packet(double x, double xc, double pc, double sx, double hbar) {
  const double norm = std::pow(2.0 * std::numbers::pi * sx * sx, -0.25);
  const double d = x - xc;
  return norm * std::exp(complex(-d * d / (4.0 * sx * sx), pc * x / hbar));
}

// Overlap |<a|b>|^2 of two packets by trapezoid quadrature on [lo, hi].
inline double packet_overlap(double xa, double pa, double xb, double pb, double sx, double hbar, double lo, double hi,
                             double dx) {
  complex s = 0.0;
  const long n = std::lround((hi - lo) / dx);
  for (long i = 0; i <= n; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    s += std::conj(gaussian_packet(x, xa, pa, sx, hbar)) * gaussian_packet(x, xb, pb, sx, hbar);
  }
  return std::norm(s * dx);
}

// <z|H|z> for H = p^2/2m + V(x) by quadrature over the packet density.
template <typename Potential>
inline double averaged_energy(double xc, double pc, double sx, double sp, double m, Potential v) {
  double s = 0.0;
  const double h = sx / 200.0;
  for (int i = -4000; i <= 4000; ++i) {
    const double x = xc + h * i;
    const double rho = std::exp(-(x - xc) * (x - xc) / (2.0 * sx * sx)) / std::sqrt(2.0 * std::numbers::pi * sx * sx);
    s += rho * v(x);
  }
  return s * h + (pc * pc + sp * sp) / (2.0 * m);
}

inline double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

}  // namespace oracle
