#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "husimi_flow/classical.hpp"
#include "husimi_flow/coherent.hpp"
#include "husimi_flow/config.hpp"
#include "husimi_flow/current.hpp"
#include "husimi_flow/husimi.hpp"
#include "husimi_flow/topology.hpp"

namespace husimi_flow {

enum class StopReason { barrier_cleared, time_cap, boundary };

std::string_view to_string(StopReason r);

struct QuantumTransmission {
  double t_final = 0.0;
  double transmission = 0.0;
  double reflection = 0.0;
  /// Largest |norm - 1| over the run.
  double norm_drift = 0.0;
  /// Mass left in |x| < 1/sqrt(k) at t_final.
  double barrier_mass = 0.0;
  StopReason stop = StopReason::barrier_cleared;
};

/// Propagates the coherent packet of `rc` until it has reached the barrier
/// and the mass in |x| < 1/sqrt(k) drops below `stop_mass`, until t_cap, or
/// until the next step would trip the boundary monitor (slow near-threshold
/// runs on a short domain); the last clean state is measured.
/// T = mass at x >= 0, R = mass at x < 0.
QuantumTransmission quantum_transmission(const RunConfig& rc, double stop_mass = 1e-4);

struct SweepRow {
  double p0 = 0.0;
  double t_final = 0.0;
  double t_q = 0.0;
  double t_c = 0.0;
  double r_q = 0.0;
  double r_c = 0.0;
  double d_t = 0.0;
  double d_r = 0.0;
  /// Energy-threshold variant of T_C (diagnostic).
  double t_c_energy = 0.0;
  double norm_drift = 0.0;
  double barrier_mass = 0.0;
  StopReason stop = StopReason::barrier_cleared;
  /// Non-empty when the row's run failed.
  std::string failure;
  /// Failure came from a physics check rather than bad input.
  bool physics_failure = false;

  bool ok() const { return failure.empty(); }
};

struct SweepResult {
  std::vector<SweepRow> rows;

  bool all_ok() const;
};

std::vector<double> default_sweep_grid();

/// Relative difference (classical - quantum) / classical; 0 when both vanish.
double relative_difference(double classical, double quantum);

/// One row per p0; rows that fail record the reason instead of aborting.
SweepResult run_transmission_sweep(const std::vector<double>& p0_list, const RunConfig& rc,
                                   const TransmissionOptions& classical = {});

/// Level set H_cl(x, p) = level inside the window as polylines (one per
/// momentum sign and connected x-range).
struct EnergyContour {
  double level = 0.0;
  std::vector<std::vector<PhasePoint>> branches;
};

EnergyContour energy_contour(double level, const PhaseSpaceWindow& window, const PhaseSpaceConfig& cfg,
                             int samples = 4001);

/// Euclidean (x, p) distance from a point to the nearest contour segment.
double contour_distance(const EnergyContour& contour, double x, double p);

/// Height of the potential maximum (V0 for the barrier); its level set is the
/// separatrix.
double separatrix_energy(const PhaseSpaceConfig& cfg);

struct ContinuityStudy {
  std::vector<int> orders;
  std::vector<double> residual_norms;
  /// component_norms[n] = L2 norm of the hbar^n part of J, n = 0..max order.
  std::vector<double> component_norms;
  double dq_dt_norm = 0.0;
  double delta = 0.0;
};

/// Continuity residual of the truncated current at each requested order for
/// the state psi. dQ/dt uses states advanced by +-delta with the propagator.
ContinuityStudy continuity_study(const WavefunctionGrid& psi, const PhaseSpaceWindow& window,
                                 const PhaseSpaceConfig& cfg, const std::vector<int>& orders, double delta = 1e-4);

struct SnapshotOptions {
  /// Current truncation; negative uses cfg.trunc_order.
  int order = -1;
  /// Re-find zeros on a run with dx/2 and a shifted coordinate range.
  bool reproducibility = true;
  /// Allowed zero displacement in |dz|; <= 0 uses half the smaller window cell.
  double max_shift = 0.0;
  double max_sep = 1.0;
  /// Energy levels for contours as multiples of the separatrix energy.
  std::vector<double> energy_levels = {0.5, 1.0, 1.5};
  ZeroSearchOptions zeros;
  StagnationOptions stagnation;
  bool topology = true;
};

struct Snapshot {
  double time = 0.0;
  HusimiField husimi;
  CurrentField current;
  CurrentField classical;
  ZeroSearchResult zeros;
  StagnationReport stagnation;
  DipolePairing dipoles;
  std::vector<EnergyContour> contours;
};

/// Evolves the packet of `rc` and analyses the state at every time.
std::vector<Snapshot> run_snapshot_pipeline(const RunConfig& rc, const std::vector<double>& times,
                                            const SnapshotOptions& opts = {});

/// Coordinate grid used for the independent reference run.
PhaseSpaceConfig reference_grid(const PhaseSpaceConfig& cfg);

struct PresetValidation {
  double p0 = 0.0;
  double t_q_desk = 0.0;
  double t_q_paper = 0.0;
  double difference = 0.0;
  bool pass = false;
};

inline constexpr double kPresetTolerance = 5e-3;

/// Desk preset against the high-fidelity preset, same physics and p0.
std::vector<PresetValidation> validate_presets(const std::vector<double>& p0_list);

// Writers: every file starts with "# config_hash = ..." and a columns line.
void write_sweep(const SweepResult& sweep, const std::string& hash, const std::filesystem::path& path);
void write_husimi(const HusimiField& field, const std::string& hash, const std::filesystem::path& path);
void write_current(const CurrentField& current, const CurrentField& classical, const std::string& hash,
                   const std::filesystem::path& path);
void write_zeros(const ZeroSearchResult& zeros, const PhaseSpaceConfig& cfg, double time, const std::string& hash,
                 const std::filesystem::path& path);
void write_stagnation(const StagnationReport& report, double time, const std::string& hash,
                      const std::filesystem::path& path);
void write_dipoles(const DipolePairing& dipoles, const std::vector<StagnationPoint>& points, double time,
                   const std::string& hash, const std::filesystem::path& path);
void write_contours(const std::vector<EnergyContour>& contours, double time, const std::string& hash,
                    const std::filesystem::path& path);
void write_continuity(const ContinuityStudy& study, double time, const std::string& hash,
                      const std::filesystem::path& path);
void write_validation(const std::vector<PresetValidation>& rows, const std::string& hash,
                      const std::filesystem::path& path);

}  // namespace husimi_flow
