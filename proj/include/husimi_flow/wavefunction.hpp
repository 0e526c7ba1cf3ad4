#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "husimi_flow/config.hpp"

namespace husimi_flow {

using complex = std::complex<double>;

/// psi(x_i) on the periodic grid x_i = x_min + i dx, at time `time`.
struct WavefunctionGrid {
  double x_min = 0.0;
  double dx = 1.0;
  double time = 0.0;
  std::vector<complex> samples;

  static WavefunctionGrid on_grid(const PhaseSpaceConfig& cfg, double time = 0.0);

  std::size_t size() const { return samples.size(); }
  double x_at(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }

  double norm() const;
  double mass_between(double lo, double hi) const;
  double mean_x() const;
  /// max |psi_i| / max |psi| over the `band` outermost points on each side.
  double edge_ratio(std::size_t band = 8) const;
};

/// |<a|b>|^2 by grid quadrature; grids must match.
double fidelity(const WavefunctionGrid& a, const WavefunctionGrid& b);

/// Columnar text dump: header (config hash, time, grid) then `x re im` rows
/// written with 17 significant digits so a reload is bit-exact.
void write_wavefunction(const WavefunctionGrid& psi, const std::string& cfg_hash,
                        const std::filesystem::path& path);
WavefunctionGrid read_wavefunction(const std::filesystem::path& path, std::string* cfg_hash = nullptr);

}  // namespace husimi_flow
