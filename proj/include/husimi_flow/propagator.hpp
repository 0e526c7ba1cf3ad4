#pragma once

#include <memory>
#include <vector>

#include "husimi_flow/config.hpp"
#include "husimi_flow/wavefunction.hpp"

namespace husimi_flow {

/// Coherent state <x|z0> sampled on the coordinate grid of `cfg`.
/// Rejects packets closer than 5 sigma_x to an edge or whose tail at the edge
/// exceeds cfg.boundary_floor.
WavefunctionGrid initial_coherent_state(double x0, double p0, const PhaseSpaceConfig& cfg);

/// Symmetric split-operator propagation on a periodic grid:
///   exp(-i V dt/2h) F^-1 exp(-i h k^2 dt/2m) F exp(-i V dt/2h).
/// Owns FFT plans and work buffers, so one instance serves one run at a time.
class SplitOperatorPropagator {
 public:
  explicit SplitOperatorPropagator(const PhaseSpaceConfig& cfg);
  ~SplitOperatorPropagator();
  SplitOperatorPropagator(SplitOperatorPropagator&&) noexcept;
  SplitOperatorPropagator& operator=(SplitOperatorPropagator&&) noexcept;
  SplitOperatorPropagator(const SplitOperatorPropagator&) = delete;
  SplitOperatorPropagator& operator=(const SplitOperatorPropagator&) = delete;

  /// One step of length `dt` (may be negative); checks norm and boundary.
  void advance(WavefunctionGrid& psi, double dt);
  void advance(WavefunctionGrid& psi) { advance(psi, config().dt); }

  /// <p> computed in momentum space.
  double mean_momentum(const WavefunctionGrid& psi);

  const PhaseSpaceConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

WavefunctionGrid step(const WavefunctionGrid& psi, const PhaseSpaceConfig& cfg);

/// Propagates psi0 to t_final (absolute time, forwards or backwards).
/// Returns one snapshot per requested time in ascending order, followed by the
/// final state unless the last snapshot already is at t_final. Times must be
/// whole multiples of dt away from psi0.time.
std::vector<WavefunctionGrid> evolve(const WavefunctionGrid& psi0, double t_final,
                                     const std::vector<double>& snapshot_times,
                                     const PhaseSpaceConfig& cfg);

/// Number of dt steps between t0 and t1; throws if not a whole multiple.
long step_count(double t0, double t1, double dt);

}  // namespace husimi_flow
