#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "husimi_flow/config.hpp"
#include "husimi_flow/husimi.hpp"

namespace husimi_flow {

struct PhaseVelocity {
  double dx = 0.0;
  double dp = 0.0;
};

/// Hamilton's equations for H_cl = p^2/2m + V(x).
PhaseVelocity hamilton_rhs(double x, double p, const PhaseSpaceConfig& cfg);

double classical_energy(double x, double p, const PhaseSpaceConfig& cfg);

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double p = 0.0;
};

struct Trajectory {
  double x0 = 0.0;
  double p0 = 0.0;
  double energy = 0.0;
  /// Largest |H(t) - H(0)| / |H(0)| seen (absolute if H(0) = 0).
  double max_drift = 0.0;
  std::vector<TrajectorySample> samples;

  const TrajectorySample& final() const { return samples.back(); }
};

inline constexpr double kEnergyDriftLimit = 1e-8;

/// Classic RK4 from t = 0 to t_final (negative runs backward). The last step
/// is shortened to land on t_final. Keeps every `keep_every`-th sample plus
/// the end points; keep_every = 0 keeps only the end points. Throws
/// EnergyDriftError past kEnergyDriftLimit.
Trajectory integrate(double x0, double p0, double t_final, double dt, const PhaseSpaceConfig& cfg,
                     int keep_every = 0);

/// End point only, no sample storage; still drift-checked.
TrajectorySample flow(double x0, double p0, double t_final, double dt, const PhaseSpaceConfig& cfg);

struct TransmissionOptions {
  /// x-cells across the initial density.
  int n_samples = 64;
  double x_cut = 0.0;
  /// Integration step; defaults to a quarter of cfg.dt.
  double dt = 0.0;
  /// Fails with ConvergenceError when doubling n_samples moves T by more.
  double convergence = 1e-3;
  bool check_convergence = true;
};

struct ClassicalTransmission {
  double transmission = 0.0;
  double reflection = 0.0;
  /// Initial-density weight with H_cl > V_max and p > 0.
  double energy_transmission = 0.0;
  int trajectories = 0;
  /// |T(n) - T(2n)| when checked, else 0.
  double convergence_gap = 0.0;
};

/// T_C for the initial Husimi density exp(-|z - z0|^2) of a coherent state at
/// (x0, p0): the weight of initial conditions ending at x > x_cut with p > 0
/// at t_final. The density is Gaussian with widths sqrt(2) sx and sqrt(2) sp.
/// For each x-cell of a grid over +-5 widths, the momentum threshold
/// separating transmitted from other orbits is located by bisection and the
/// p-weight above it taken from the Gaussian CDF.
ClassicalTransmission classical_transmission(double x0, double p0, const PhaseSpaceConfig& cfg, double t_final,
                                             const TransmissionOptions& opts = {});

/// Density on a window.
struct DensityField {
  PhaseSpaceWindow window;
  double time = 0.0;
  std::vector<double> q;

  double max() const;
  /// Sum q dx dp / (2 pi hbar).
  double normalization(const PhaseSpaceConfig& cfg) const;
};

/// Liouville transport Q(x, p; t) = Q(x', p'; 0) where (x', p') is the
/// backward-flowed preimage of each window node. Preimages outside the
/// initial field's window give 0; values come from the exact sampler.
DensityField classical_pullback_field(const HusimiField& initial, double t, const PhaseSpaceWindow& window,
                                      const PhaseSpaceConfig& cfg, double dt = 0.0);

DensityField to_density(const HusimiField& field);

/// Columnar export: id t x p.
void write_trajectories(const std::vector<Trajectory>& bundle, const std::string& config_hash,
                        const std::filesystem::path& path);

}  // namespace husimi_flow
