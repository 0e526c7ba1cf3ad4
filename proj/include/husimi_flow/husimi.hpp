#pragma once

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "husimi_flow/config.hpp"
#include "husimi_flow/wavefunction.hpp"

namespace husimi_flow {

using complex = std::complex<double>;

/// Largest z-derivative order the samplers support.
inline constexpr int kMaxStackOrder = 24;

/// Husimi amplitude and its z-derivative stack at one phase-space point.
///
/// `stack[m]` holds the reduced derivative
///   R_m = e^{|z|^2/2} d^m/dz^m [ e^{-conj(z) z} conj(theta)(z) ],
/// which stays O(1) where the state lives, while the unreduced derivative and
/// theta itself over- or underflow far from the origin. The relations used
/// downstream are
///   d^m Q / dz^m = amplitude * R_m,    R_0 = conj(amplitude).
struct HusimiSample {
  complex amplitude;
  std::array<complex, kMaxStackOrder + 1> stack{};
  int order = 0;
  /// Gaussian mass of |<x|z>|^2 lying outside the coordinate grid.
  double kernel_mass_outside = 0.0;
};

/// Evaluates <z|psi> and the reduced stack at arbitrary z by quadrature of the
/// coherent-state kernel against psi. Every z-derivative acts on the explicit
/// Gaussian kernel, giving Hermite weights He_m((x - x(z))/sx).
class HusimiSampler {
 public:
  HusimiSampler(WavefunctionGrid psi, const PhaseSpaceConfig& cfg);

  HusimiSample evaluate(complex z, int max_order) const;
  complex amplitude(complex z) const { return evaluate(z, 0).amplitude; }
  double density(complex z) const { return std::norm(amplitude(z)); }

  const WavefunctionGrid& wavefunction() const { return psi_; }
  const PhaseSpaceConfig& config() const { return cfg_; }

 private:
  WavefunctionGrid psi_;
  PhaseSpaceConfig cfg_;
};

complex husimi_amplitude(const WavefunctionGrid& psi, complex z, const PhaseSpaceConfig& cfg);
/// Reduced stack R_0..R_max_order at z (see HusimiSample).
std::vector<complex> amplitude_z_derivatives(const WavefunctionGrid& psi, complex z, int max_order,
                                             const PhaseSpaceConfig& cfg);

/// Husimi amplitude, density and reduced derivative stack on a window.
struct HusimiField {
  PhaseSpaceWindow window;
  double time = 0.0;
  int order = 0;
  std::vector<complex> amplitude;
  std::vector<double> q;
  /// stack[m][node] = R_m at that node.
  std::vector<std::vector<complex>> stack;
  /// Largest kernel mass outside the coordinate grid over all nodes.
  double max_kernel_mass_outside = 0.0;
  std::shared_ptr<const HusimiSampler> sampler;

  complex z_at(int ix, int ip) const;
  double max_q() const;
  /// Sum Q dx dp / (2 pi hbar) over the nodes.
  double normalization() const;
  /// d^m Q / dz^m at a node.
  complex q_derivative(int m, std::size_t node) const {
    return m == 0 ? complex(q[node]) : amplitude[node] * stack[static_cast<std::size_t>(m)][node];
  }
  /// Window cell size in z units (Re z, Im z).
  double cell_re() const;
  double cell_im() const;
};

/// Fills amplitude, Q and the stack to depth `order` (defaults to cfg.trunc_order).
HusimiField husimi_field(const WavefunctionGrid& psi, const PhaseSpaceWindow& window,
                         const PhaseSpaceConfig& cfg, std::optional<int> order = std::nullopt);

/// Q with a floor of max(Q) * 1e-16 applied before taking log10.
std::vector<double> log_density(const HusimiField& field);

/// Largest node value of Q within `radius` nodes of (x, p).
double neighbourhood_q(const HusimiField& field, double x, double p, int radius);

enum class ZeroStatus { converged, not_converged, outside_window, duplicate };

struct HusimiZero {
  complex z;
  double x = 0.0;
  double p = 0.0;
  /// |<z|psi>| at the refined point relative to the window maximum.
  double residual = 0.0;
  int iterations = 0;
  ZeroStatus status = ZeroStatus::converged;
  /// Largest Q in the node neighbourhood relative to max Q; tiny values mark
  /// the numerically meaningless outer "sea".
  double local_q = 0.0;
  bool significant = false;
  /// Set once the zero has been re-found with an independent wavefunction.
  std::optional<bool> reproduced;
  bool stable() const { return significant && reproduced.value_or(true); }
};

struct ZeroSearchOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;
  /// Neighbourhood Q / max Q below which a zero is flagged as sea.
  double significance = 1e-12;
  int neighbourhood = 3;
};

struct ZeroSearchResult {
  std::vector<HusimiZero> zeros;
  /// Candidates that did not yield a new zero inside the window.
  std::vector<HusimiZero> rejected;
};

/// Zeros of theta inside the window: node-wise local minima of Q seed a Newton
/// iteration z <- z - theta/theta', using the exact first derivative.
ZeroSearchResult find_zeros(const HusimiField& field, const ZeroSearchOptions& opts = {});

/// Newton refinement of a single zero of theta from `start`.
HusimiZero refine_zero(const HusimiSampler& sampler, complex start, const ZeroSearchOptions& opts,
                       double amplitude_scale);

/// Re-finds every zero with `reference` (e.g. a run on a finer or shifted grid)
/// and marks it reproduced when it moves by less than `max_shift` in z units.
void check_reproducibility(std::vector<HusimiZero>& zeros, const HusimiSampler& reference,
                           double max_shift, double amplitude_scale, const ZeroSearchOptions& opts = {});

}  // namespace husimi_flow
