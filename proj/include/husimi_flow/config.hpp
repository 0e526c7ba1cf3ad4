#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

namespace husimi_flow {

enum class PotentialKind { gaussian_barrier, free, harmonic };

std::string_view to_string(PotentialKind kind);
PotentialKind potential_from_string(std::string_view name);

/// Physical constants and propagation grid. The coherent-state widths are
/// derived from (hbar, mass, omega) and cannot be set on their own.
struct PhaseSpaceConfig {
  double hbar = 0.01;
  double mass = 1.0;
  double omega = 1.0;
  PotentialKind potential = PotentialKind::gaussian_barrier;
  double v0 = 2.0;
  double k = 3.0;
  double x_min = -10.0;
  double x_max = 10.0;
  double dx = 0.0025;
  double dt = 0.01;
  int trunc_order = 10;
  /// |psi| at the grid edge relative to the peak above which a run is rejected.
  double boundary_floor = 1e-12;

  double sigma_x() const;
  double sigma_p() const;
  /// Number of periodic grid points; x_max itself is excluded.
  std::size_t grid_size() const;
  double x_at(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }

  /// Potential energy V(x) of the propagated Hamiltonian.
  double potential_energy(double x) const;

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

/// Rectangular (x, p) sampling window; nodes include both end points.
struct PhaseSpaceWindow {
  double x_lo = -2.5;
  double x_hi = 1.5;
  double p_lo = -2.6;
  double p_hi = 2.6;
  int nx = 200;
  int np = 200;

  double step_x() const { return (x_hi - x_lo) / (nx - 1); }
  double step_p() const { return (p_hi - p_lo) / (np - 1); }
  double x_at(int i) const { return x_lo + i * step_x(); }
  double p_at(int j) const { return p_lo + j * step_p(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(np); }
  /// Row-major node index, rows run along p.
  std::size_t index(int ix, int ip) const {
    return static_cast<std::size_t>(ip) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
  }

  void validate() const;
  bool operator==(const PhaseSpaceWindow&) const = default;
};

/// Everything one experiment run needs: physics, initial packet and window.
struct RunConfig {
  std::string preset = "paper";
  PhaseSpaceConfig physics;
  double x0 = -4.0;
  double p0 = 1.8;
  PhaseSpaceWindow window;
  /// Upper bound on the propagation time used for transmission measurements.
  double t_cap = 8.0;

  void validate() const;
};

/// Appendix-fidelity values: dx = 0.0025, 500 x 500 window, N = 10.
RunConfig paper_preset();
/// Coarser desk-scale grid: dx = 0.01, 200 x 200 window, N = 6.
RunConfig desk_preset();
RunConfig preset_by_name(std::string_view name);

/// Parses `key = value` lines (with `#` comments) on top of `base`.
RunConfig parse_run_config(std::string_view text, RunConfig base = paper_preset());
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Canonical text form; round-trips bit-exactly through parse_run_config.
std::string to_text(const RunConfig& cfg);
/// 16 hex digits identifying the canonical text form.
std::string config_hash(const RunConfig& cfg);

}  // namespace husimi_flow
