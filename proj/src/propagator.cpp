#include "husimi_flow/propagator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <limits>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "husimi_flow/coherent.hpp"
#include "husimi_flow/errors.hpp"

namespace husimi_flow {

namespace {

// The FFTW planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kStepNormTolerance = 1e-12;

}  // namespace

WavefunctionGrid initial_coherent_state(double x0, double p0, const PhaseSpaceConfig& cfg) {
  cfg.validate();
  const double sx = cfg.sigma_x();
  if (x0 - cfg.x_min < 5.0 * sx || cfg.x_max - x0 < 5.0 * sx) {
    throw std::invalid_argument("initial_coherent_state: packet centre within 5 sigma_x of the grid edge");
  }
  auto psi = WavefunctionGrid::on_grid(cfg);
  const complex z0 = z_from_xp(x0, p0, cfg);
  for (std::size_t i = 0; i < psi.size(); ++i) psi.samples[i] = coherent_kernel(z0, psi.x_at(i), cfg);
  if (psi.edge_ratio() > cfg.boundary_floor) {
    throw BoundaryContaminationError("initial_coherent_state: Gaussian tail exceeds the boundary floor");
  }
  return psi;
}

struct SplitOperatorPropagator::Impl {
  PhaseSpaceConfig cfg;
  std::size_t n = 0;
  fftw_complex* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> potential;
  std::vector<double> wavenumber;
  double cached_dt = std::numeric_limits<double>::quiet_NaN();
  std::vector<complex> half_potential_phase;
  std::vector<complex> kinetic_phase;

  explicit Impl(const PhaseSpaceConfig& c) : cfg(c), n(c.grid_size()) {
    cfg.validate();
    potential.resize(n);
    wavenumber.resize(n);
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * cfg.dx);
    for (std::size_t i = 0; i < n; ++i) {
      potential[i] = cfg.potential_energy(cfg.x_at(i));
      const long j = i < (n + 1) / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
      wavenumber[i] = dk * static_cast<double>(j);
    }
    std::lock_guard lock(planner_mutex());
    buffer = fftw_alloc_complex(n);
    forward = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(buffer);
  }

  void prepare(double dt) {
    if (dt == cached_dt) return;
    half_potential_phase.resize(n);
    kinetic_phase.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      half_potential_phase[i] = std::polar(1.0, -0.5 * potential[i] * dt / cfg.hbar);
      const double kk = wavenumber[i];
      kinetic_phase[i] = std::polar(1.0 / static_cast<double>(n), -cfg.hbar * kk * kk * dt / (2.0 * cfg.mass));
    }
    cached_dt = dt;
  }

  complex* data() { return reinterpret_cast<complex*>(buffer); }
};

SplitOperatorPropagator::SplitOperatorPropagator(const PhaseSpaceConfig& cfg)
    : impl_(std::make_unique<Impl>(cfg)) {}
SplitOperatorPropagator::~SplitOperatorPropagator() = default;
SplitOperatorPropagator::SplitOperatorPropagator(SplitOperatorPropagator&&) noexcept = default;
SplitOperatorPropagator& SplitOperatorPropagator::operator=(SplitOperatorPropagator&&) noexcept = default;

const PhaseSpaceConfig& SplitOperatorPropagator::config() const { return impl_->cfg; }

void SplitOperatorPropagator::advance(WavefunctionGrid& psi, double dt) {
  auto& s = *impl_;
  if (psi.size() != s.n) throw std::invalid_argument("propagator: wavefunction grid mismatch");
  s.prepare(dt);
  const double norm_before = psi.norm();
  complex* buf = s.data();
  for (std::size_t i = 0; i < s.n; ++i) buf[i] = psi.samples[i] * s.half_potential_phase[i];
  fftw_execute(s.forward);
  for (std::size_t i = 0; i < s.n; ++i) buf[i] *= s.kinetic_phase[i];
  fftw_execute(s.backward);
  for (std::size_t i = 0; i < s.n; ++i) psi.samples[i] = buf[i] * s.half_potential_phase[i];
  psi.time += dt;

  const double norm_after = psi.norm();
  if (std::abs(norm_after - norm_before) > kStepNormTolerance * norm_before) {
    std::ostringstream msg;
    msg << "propagator: norm changed by " << norm_after - norm_before << " in one step at t=" << psi.time;
    throw NormLossError(msg.str());
  }
  if (psi.edge_ratio() > s.cfg.boundary_floor) {
    std::ostringstream msg;
    msg << "propagator: boundary amplitude " << psi.edge_ratio() << " of peak exceeds floor at t=" << psi.time;
    throw BoundaryContaminationError(msg.str());
  }
}

double SplitOperatorPropagator::mean_momentum(const WavefunctionGrid& psi) {
  auto& s = *impl_;
  if (psi.size() != s.n) throw std::invalid_argument("propagator: wavefunction grid mismatch");
  complex* buf = s.data();
  std::copy(psi.samples.begin(), psi.samples.end(), buf);
  fftw_execute(s.forward);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    const double w = std::norm(buf[i]);
    num += s.cfg.hbar * s.wavenumber[i] * w;
    den += w;
  }
  return num / den;
}

WavefunctionGrid step(const WavefunctionGrid& psi, const PhaseSpaceConfig& cfg) {
  SplitOperatorPropagator prop(cfg);
  WavefunctionGrid out = psi;
  prop.advance(out);
  return out;
}

long step_count(double t0, double t1, double dt) {
  const double ratio = (t1 - t0) / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-6) {
    std::ostringstream msg;
    msg << "time " << t1 << " is not a whole number of steps of " << dt << " from " << t0;
    throw std::invalid_argument(msg.str());
  }
  return static_cast<long>(rounded);
}

std::vector<WavefunctionGrid> evolve(const WavefunctionGrid& psi0, double t_final,
                                     const std::vector<double>& snapshot_times,
                                     const PhaseSpaceConfig& cfg) {
  const double direction = t_final >= psi0.time ? 1.0 : -1.0;
  const long total = std::abs(step_count(psi0.time, t_final, cfg.dt));
  std::vector<long> marks;
  for (const double t : snapshot_times) {
    const long m = direction * step_count(psi0.time, t, cfg.dt);
    if (m < 0 || m > total) throw std::invalid_argument("evolve: snapshot time outside the run");
    marks.push_back(m);
  }
  std::sort(marks.begin(), marks.end());

  SplitOperatorPropagator prop(cfg);
  std::vector<WavefunctionGrid> out;
  WavefunctionGrid psi = psi0;
  auto mark = marks.begin();
  for (long i = 0; i <= total; ++i) {
    if (i > 0) {
      prop.advance(psi, direction * cfg.dt);
      // Keep the clock on the exact step lattice.
      psi.time = psi0.time + direction * static_cast<double>(i) * cfg.dt;
    }
    while (mark != marks.end() && *mark == i) {
      out.push_back(psi);
      ++mark;
    }
  }
  if (marks.empty() || marks.back() != total) out.push_back(psi);
  return out;
}

}  // namespace husimi_flow
