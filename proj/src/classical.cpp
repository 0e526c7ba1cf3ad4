#include "husimi_flow/classical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "husimi_flow/coherent.hpp"
#include "husimi_flow/errors.hpp"
#include "husimi_flow/parallel.hpp"

namespace husimi_flow {

namespace {

double force(double x, const PhaseSpaceConfig& cfg) {
  switch (cfg.potential) {
    case PotentialKind::gaussian_barrier: return 2.0 * cfg.k * cfg.v0 * x * std::exp(-cfg.k * x * x);
    case PotentialKind::free: return 0.0;
    case PotentialKind::harmonic: return -cfg.mass * cfg.omega * cfg.omega * x;
  }
  return 0.0;
}

struct State {
  double x;
  double p;
};

State rk4_step(State s, double h, const PhaseSpaceConfig& cfg) {
  const auto f = [&cfg](State v) { return hamilton_rhs(v.x, v.p, cfg); };
  const PhaseVelocity k1 = f(s);
  const PhaseVelocity k2 = f({s.x + 0.5 * h * k1.dx, s.p + 0.5 * h * k1.dp});
  const PhaseVelocity k3 = f({s.x + 0.5 * h * k2.dx, s.p + 0.5 * h * k2.dp});
  const PhaseVelocity k4 = f({s.x + h * k3.dx, s.p + h * k3.dp});
  return {s.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
          s.p + h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp)};
}

double drift(double e, double e0) { return e0 != 0.0 ? std::abs(e - e0) / std::abs(e0) : std::abs(e - e0); }

template <typename Visit>
double run(double x0, double p0, double t_final, double dt, const PhaseSpaceConfig& cfg, Visit&& visit) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  const double e0 = classical_energy(x0, p0, cfg);
  const double span = std::abs(t_final);
  const double dir = t_final < 0.0 ? -1.0 : 1.0;
  const long steps = static_cast<long>(std::ceil(span / dt - 1e-9));
  State s{x0, p0};
  double worst = 0.0;
  for (long i = 0; i < steps; ++i) {
    const double h = (i + 1 == steps) ? span - dt * static_cast<double>(steps - 1) : dt;
    s = rk4_step(s, dir * h, cfg);
    const double d = drift(classical_energy(s.x, s.p, cfg), e0);
    worst = std::max(worst, d);
    if (!(d <= kEnergyDriftLimit)) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "classical energy drift %.3g exceeds limit %.0e", d, kEnergyDriftLimit);
      throw EnergyDriftError(msg);
    }
    visit(i + 1, steps, i + 1 == steps ? t_final : dir * dt * static_cast<double>(i + 1), s);
  }
  return worst;
}

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

double barrier_top(const PhaseSpaceConfig& cfg) {
  return cfg.potential == PotentialKind::gaussian_barrier ? cfg.v0 : 0.0;
}

}  // namespace

PhaseVelocity hamilton_rhs(double x, double p, const PhaseSpaceConfig& cfg) {
  return {p / cfg.mass, force(x, cfg)};
}

double classical_energy(double x, double p, const PhaseSpaceConfig& cfg) {
  return 0.5 * p * p / cfg.mass + cfg.potential_energy(x);
}

Trajectory integrate(double x0, double p0, double t_final, double dt, const PhaseSpaceConfig& cfg, int keep_every) {
  Trajectory tr;
  tr.x0 = x0;
  tr.p0 = p0;
  tr.energy = classical_energy(x0, p0, cfg);
  tr.samples.push_back({0.0, x0, p0});
  tr.max_drift = run(x0, p0, t_final, dt, cfg, [&](long i, long n, double t, State s) {
    if (i == n || (keep_every > 0 && i % keep_every == 0)) tr.samples.push_back({t, s.x, s.p});
  });
  return tr;
}

TrajectorySample flow(double x0, double p0, double t_final, double dt, const PhaseSpaceConfig& cfg) {
  TrajectorySample end{0.0, x0, p0};
  run(x0, p0, t_final, dt, cfg, [&](long i, long n, double t, State s) {
    if (i == n) end = {t, s.x, s.p};
  });
  return end;
}

namespace {

struct Weighted {
  double transmitted = 0.0;
  double energy = 0.0;
  double total = 0.0;
};

Weighted transmission_pass(double x0, double p0, const PhaseSpaceConfig& cfg, double t_final, double dt,
                           double x_cut, int n) {
  const double sx = std::numbers::sqrt2 * cfg.sigma_x();
  const double sp = std::numbers::sqrt2 * cfg.sigma_p();
  const double lo = -5.0, hi = 5.0;
  const double cell = (hi - lo) / n;
  const double p_lo = p0 - 5.0 * sp;
  const double p_hi = p0 + 5.0 * sp;
  const double e_top = barrier_top(cfg);

  const auto transmitted = [&](double x, double p) {
    const TrajectorySample end = flow(x, p, t_final, dt, cfg);
    return end.x > x_cut && end.p > 0.0;
  };

  std::vector<Weighted> parts(static_cast<std::size_t>(n));
  parallel_for(parts.size(), [&](std::size_t i) {
    const double u0 = lo + cell * static_cast<double>(i);
    const double w = normal_cdf(u0 + cell) - normal_cdf(u0);
    const double x = x0 + sx * (u0 + 0.5 * cell);
    const double mass_p = normal_cdf(5.0) - normal_cdf(-5.0);
    double above;
    if (!transmitted(x, p_hi)) {
      above = 0.0;
    } else if (transmitted(x, p_lo)) {
      above = mass_p;
    } else {
      double a = p_lo, b = p_hi;
      while (b - a > 1e-12 * std::max(1.0, std::abs(b))) {
        const double m = 0.5 * (a + b);
        (transmitted(x, m) ? b : a) = m;
      }
      above = normal_cdf(5.0) - normal_cdf((0.5 * (a + b) - p0) / sp);
    }
    // energy criterion: p above sqrt(2m (V_max - V(x)))
    const double gap = e_top - cfg.potential_energy(x);
    const double p_e = gap > 0.0 ? std::sqrt(2.0 * cfg.mass * gap) : 0.0;
    const double u_e = std::clamp((p_e - p0) / sp, -5.0, 5.0);
    parts[i] = {w * above, w * (normal_cdf(5.0) - normal_cdf(u_e)), w * mass_p};
  });
  Weighted sum;
  for (const auto& p : parts) {
    sum.transmitted += p.transmitted;
    sum.energy += p.energy;
    sum.total += p.total;
  }
  return sum;
}

}  // namespace

ClassicalTransmission classical_transmission(double x0, double p0, const PhaseSpaceConfig& cfg, double t_final,
                                             const TransmissionOptions& opts) {
  if (opts.n_samples < 2) throw std::invalid_argument("classical_transmission: n_samples must be at least 2");
  const double dt = opts.dt > 0.0 ? opts.dt : 0.25 * cfg.dt;
  const Weighted w = transmission_pass(x0, p0, cfg, t_final, dt, opts.x_cut, opts.n_samples);
  ClassicalTransmission out;
  out.transmission = w.transmitted / w.total;
  out.reflection = 1.0 - out.transmission;
  out.energy_transmission = w.energy / w.total;
  out.trajectories = opts.n_samples;
  if (opts.check_convergence) {
    const Weighted fine = transmission_pass(x0, p0, cfg, t_final, dt, opts.x_cut, 2 * opts.n_samples);
    out.convergence_gap = std::abs(fine.transmitted / fine.total - out.transmission);
    if (out.convergence_gap > opts.convergence) {
      throw ConvergenceError("classical transmission not converged: gap " + std::to_string(out.convergence_gap));
    }
  }
  return out;
}

double DensityField::max() const {
  double m = 0.0;
  for (double v : q) m = std::max(m, v);
  return m;
}

double DensityField::normalization(const PhaseSpaceConfig& cfg) const {
  double s = 0.0;
  for (double v : q) s += v;
  return s * window.step_x() * window.step_p() / (2.0 * std::numbers::pi * cfg.hbar);
}

DensityField classical_pullback_field(const HusimiField& initial, double t, const PhaseSpaceWindow& window,
                                      const PhaseSpaceConfig& cfg, double dt) {
  window.validate();
  if (!initial.sampler) throw std::invalid_argument("classical_pullback_field: field has no sampler");
  const double step = dt > 0.0 ? dt : 0.25 * cfg.dt;
  const PhaseSpaceWindow& src = initial.window;
  DensityField out{window, initial.time + t, std::vector<double>(window.size(), 0.0)};
  // integration roundoff must not push a preimage on the edge outside
  const double sx = 1e-9 * (src.x_hi - src.x_lo);
  const double sp = 1e-9 * (src.p_hi - src.p_lo);
  parallel_for(static_cast<std::size_t>(window.np), [&](std::size_t row) {
    const int ip = static_cast<int>(row);
    for (int ix = 0; ix < window.nx; ++ix) {
      const double x = window.x_at(ix);
      const double p = window.p_at(ip);
      const TrajectorySample pre = t == 0.0 ? TrajectorySample{0.0, x, p} : flow(x, p, -t, step, cfg);
      if (pre.x < src.x_lo - sx || pre.x > src.x_hi + sx || pre.p < src.p_lo - sp || pre.p > src.p_hi + sp) continue;
      out.q[window.index(ix, ip)] = initial.sampler->density(z_from_xp(pre.x, pre.p, cfg));
    }
  });
  return out;
}

DensityField to_density(const HusimiField& field) { return {field.window, field.time, field.q}; }

void write_trajectories(const std::vector<Trajectory>& bundle, const std::string& config_hash,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# config_hash = " << config_hash << "\n# columns = id t x p\n";
  char line[128];
  for (std::size_t id = 0; id < bundle.size(); ++id) {
    for (const auto& s : bundle[id].samples) {
      std::snprintf(line, sizeof line, "%zu %.17g %.17g %.17g\n", id, s.t, s.x, s.p);
      out << line;
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace husimi_flow
