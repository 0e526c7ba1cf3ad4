#include "husimi_flow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "husimi_flow/coherent.hpp"
#include "husimi_flow/errors.hpp"
#include "husimi_flow/parallel.hpp"
#include "husimi_flow/propagator.hpp"

namespace husimi_flow {

QuantumTransmission quantum_transmission(const RunConfig& rc, double stop_mass) {
  rc.validate();
  const PhaseSpaceConfig& cfg = rc.physics;
  WavefunctionGrid psi = initial_coherent_state(rc.x0, rc.p0, cfg);
  SplitOperatorPropagator prop(cfg);
  const double half_width = 1.0 / std::sqrt(cfg.k);
  const long steps = std::lround(std::floor(rc.t_cap / cfg.dt + 1e-9));
  const double n0 = psi.norm();
  QuantumTransmission out;
  out.stop = StopReason::time_cap;
  bool reached = false;
  for (long i = 0; i < steps; ++i) {
    WavefunctionGrid next = psi;
    try {
      prop.advance(next);
    } catch (const BoundaryContaminationError&) {
      out.stop = StopReason::boundary;
      break;
    }
    psi = std::move(next);
    out.norm_drift = std::max(out.norm_drift, std::abs(psi.norm() - n0));
    const double inside = psi.mass_between(-half_width, half_width);
    if (inside >= stop_mass) reached = true;
    if (reached && inside < stop_mass) {
      out.stop = StopReason::barrier_cleared;
      break;
    }
  }
  out.t_final = psi.time;
  out.barrier_mass = psi.mass_between(-half_width, half_width);
  for (std::size_t i = 0; i < psi.samples.size(); ++i) {
    (psi.x_at(i) >= 0.0 ? out.transmission : out.reflection) += std::norm(psi.samples[i]) * psi.dx;
  }
  return out;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::barrier_cleared: return "barrier_cleared";
    case StopReason::time_cap: return "time_cap";
    case StopReason::boundary: return "boundary";
  }
  return "unknown";
}

bool SweepResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok(); });
}

std::vector<double> default_sweep_grid() {
  std::vector<double> grid;
  for (int i = 16; i <= 24; ++i) grid.push_back(i / 10.0);
  return grid;
}

double relative_difference(double classical, double quantum) {
  if (classical == 0.0) return quantum == 0.0 ? 0.0 : -std::copysign(INFINITY, quantum);
  return (classical - quantum) / classical;
}

SweepResult run_transmission_sweep(const std::vector<double>& p0_list, const RunConfig& rc,
                                   const TransmissionOptions& classical) {
  SweepResult out;
  out.rows.resize(p0_list.size());
  parallel_for(p0_list.size(), [&](std::size_t i) {
    SweepRow& row = out.rows[i];
    row.p0 = p0_list[i];
    try {
      RunConfig run = rc;
      run.p0 = row.p0;
      const QuantumTransmission q = quantum_transmission(run);
      const ClassicalTransmission c = classical_transmission(run.x0, run.p0, run.physics, q.t_final, classical);
      row.t_final = q.t_final;
      row.t_q = q.transmission;
      row.r_q = q.reflection;
      row.t_c = c.transmission;
      row.r_c = c.reflection;
      row.t_c_energy = c.energy_transmission;
      row.norm_drift = q.norm_drift;
      row.barrier_mass = q.barrier_mass;
      row.stop = q.stop;
      row.d_t = relative_difference(row.t_c, row.t_q);
      row.d_r = relative_difference(row.r_c, row.r_q);
    } catch (const PhysicsError& e) {
      row.failure = e.what();
      row.physics_failure = true;
    } catch (const std::exception& e) {
      row.failure = e.what();
    }
  });
  return out;
}

double separatrix_energy(const PhaseSpaceConfig& cfg) {
  return cfg.potential == PotentialKind::gaussian_barrier ? cfg.v0 : 0.0;
}

EnergyContour energy_contour(double level, const PhaseSpaceWindow& window, const PhaseSpaceConfig& cfg,
                             int samples) {
  if (samples < 2) throw std::invalid_argument("energy_contour: need at least 2 samples");
  EnergyContour out;
  out.level = level;
  for (const double sign : {1.0, -1.0}) {
    std::vector<PhasePoint> branch;
    for (int i = 0; i < samples; ++i) {
      const double x = window.x_lo + (window.x_hi - window.x_lo) * i / (samples - 1);
      const double kinetic = level - cfg.potential_energy(x);
      const double p = kinetic >= 0.0 ? sign * std::sqrt(2.0 * cfg.mass * kinetic) : NAN;
      if (std::isfinite(p) && p >= window.p_lo && p <= window.p_hi) {
        branch.push_back({x, p});
      } else if (!branch.empty()) {
        out.branches.push_back(std::move(branch));
        branch.clear();
      }
    }
    if (!branch.empty()) out.branches.push_back(std::move(branch));
  }
  return out;
}

double contour_distance(const EnergyContour& contour, double x, double p) {
  double best = INFINITY;
  for (const auto& branch : contour.branches) {
    if (branch.size() == 1) best = std::min(best, std::hypot(branch[0].x - x, branch[0].p - p));
    for (std::size_t i = 0; i + 1 < branch.size(); ++i) {
      const double ax = branch[i].x, ap = branch[i].p;
      const double bx = branch[i + 1].x - ax, bp = branch[i + 1].p - ap;
      const double len2 = bx * bx + bp * bp;
      const double s = len2 > 0.0 ? std::clamp(((x - ax) * bx + (p - ap) * bp) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, std::hypot(ax + s * bx - x, ap + s * bp - p));
    }
  }
  return best;
}

namespace {

double l2(const std::vector<complex>& v, const PhaseSpaceWindow& w) {
  double s = 0.0;
  for (const complex& c : v) s += std::norm(c);
  return std::sqrt(s * w.step_x() * w.step_p());
}

}  // namespace

ContinuityStudy continuity_study(const WavefunctionGrid& psi, const PhaseSpaceWindow& window,
                                 const PhaseSpaceConfig& cfg, const std::vector<int>& orders, double delta) {
  if (orders.empty()) throw std::invalid_argument("continuity_study: no orders requested");
  if (!(delta > 0.0)) throw std::invalid_argument("continuity_study: delta must be positive");
  const int max_order = *std::max_element(orders.begin(), orders.end());
  SplitOperatorPropagator prop(cfg);
  WavefunctionGrid after = psi;
  WavefunctionGrid before = psi;
  prop.advance(after, delta);
  prop.advance(before, -delta);
  const HusimiField f_before = husimi_field(before, window, cfg, 0);
  const HusimiField f_now = husimi_field(psi, window, cfg, max_order);
  const HusimiField f_after = husimi_field(after, window, cfg, 0);
  const AveragedHamiltonian h(cfg);
  ContinuityStudy out;
  out.orders = orders;
  out.delta = delta;
  for (const int n : orders) {
    const CurrentField j = quantum_current(f_now, h, n, n == max_order);
    const ContinuityResidual r = continuity_residual(f_before, f_now, f_after, j, delta);
    out.residual_norms.push_back(r.norm);
    out.dq_dt_norm = r.dq_dt_norm;
    if (n == max_order) {
      for (const auto& c : j.components) out.component_norms.push_back(l2(c, window));
    }
  }
  return out;
}

PhaseSpaceConfig reference_grid(const PhaseSpaceConfig& cfg) {
  PhaseSpaceConfig ref = cfg;
  ref.dx = 0.5 * cfg.dx;
  // off-lattice shift so no reference node coincides with an original one
  const double shift = 0.3 + 0.25 * cfg.dx;
  ref.x_min -= shift;
  ref.x_max -= shift;
  return ref;
}

std::vector<Snapshot> run_snapshot_pipeline(const RunConfig& rc, const std::vector<double>& times,
                                            const SnapshotOptions& opts) {
  rc.validate();
  if (times.empty()) return {};
  const PhaseSpaceConfig& cfg = rc.physics;
  const int order = opts.order < 0 ? cfg.trunc_order : opts.order;
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const double t_last = sorted.back();

  const auto states = evolve(initial_coherent_state(rc.x0, rc.p0, cfg), t_last, sorted, cfg);
  std::vector<WavefunctionGrid> reference;
  const PhaseSpaceConfig ref_cfg = reference_grid(cfg);
  if (opts.reproducibility) reference = evolve(initial_coherent_state(rc.x0, rc.p0, ref_cfg), t_last, sorted, ref_cfg);

  const AveragedHamiltonian h(cfg);
  std::vector<Snapshot> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    Snapshot snap;
    snap.time = states[i].time;
    snap.husimi = husimi_field(states[i], rc.window, cfg, std::max(order, 1));
    snap.current = quantum_current(snap.husimi, h, order);
    snap.classical = classical_current(snap.husimi, h);
    snap.zeros = find_zeros(snap.husimi, opts.zeros);
    if (opts.reproducibility) {
      const HusimiSampler ref(reference[i], ref_cfg);
      const double shift =
          opts.max_shift > 0.0 ? opts.max_shift : 0.5 * std::min(snap.husimi.cell_re(), snap.husimi.cell_im());
      check_reproducibility(snap.zeros.zeros, ref, shift, std::sqrt(snap.husimi.max_q()), opts.zeros);
    }
    if (opts.topology) {
      const CurrentSampler sampler(snap.husimi.sampler, h, order);
      snap.stagnation = find_stagnation_points(snap.current, snap.husimi, sampler, snap.zeros, opts.stagnation);
      snap.dipoles = pair_dipoles(snap.stagnation.points, opts.max_sep);
    }
    const double e_sep = separatrix_energy(cfg);
    for (const double level : opts.energy_levels) {
      snap.contours.push_back(energy_contour(level * e_sep, rc.window, cfg));
    }
    out.push_back(std::move(snap));
  }
  return out;
}

std::vector<PresetValidation> validate_presets(const std::vector<double>& p0_list) {
  std::vector<PresetValidation> out(p0_list.size());
  parallel_for(p0_list.size(), [&](std::size_t i) {
    RunConfig desk = desk_preset();
    RunConfig paper = paper_preset();
    desk.p0 = paper.p0 = p0_list[i];
    PresetValidation& v = out[i];
    v.p0 = p0_list[i];
    v.t_q_desk = quantum_transmission(desk).transmission;
    v.t_q_paper = quantum_transmission(paper).transmission;
    v.difference = v.t_q_desk - v.t_q_paper;
    v.pass = std::abs(v.difference) < kPresetTolerance;
  });
  return out;
}

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& hash) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# config_hash = " << hash << '\n';
  }
  ~CsvFile() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("write failed for " + path_.string());
  }
  void meta(const char* key, double value) { line("# %s = %.17g\n", key, value); }
  void header(const char* columns) { out_ << columns << '\n'; }

  template <typename... Args>
  void line(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out_ << buf;
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace

void write_sweep(const SweepResult& sweep, const std::string& hash, const std::filesystem::path& path) {
  CsvFile f(path, hash);
  f.header("p0,t_final,T_Q,T_C,R_Q,R_C,D_T,D_R,T_C_energy,norm_drift,barrier_mass,stop,status");
  for (const auto& r : sweep.rows) {
    std::string status = r.ok() ? "ok" : (r.physics_failure ? "physics_failure: " : "error: ") + r.failure;
    std::replace(status.begin(), status.end(), ',', ';');
    f.line("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.6e,%.6e,%s,%s\n", r.p0, r.t_final, r.t_q, r.t_c,
           r.r_q, r.r_c, r.d_t, r.d_r, r.t_c_energy, r.norm_drift, r.barrier_mass,
           std::string(to_string(r.stop)).c_str(), status.c_str());
  }
}

void write_husimi(const HusimiField& field, const std::string& hash, const std::filesystem::path& path) {
  CsvFile f(path, hash);
  f.meta("time", field.time);
  f.meta("normalization", field.normalization());
  f.header("x,p,Q,log10_Q");
  const auto logq = log_density(field);
  const PhaseSpaceWindow& w = field.window;
  for (int ip = 0; ip < w.np; ++ip) {
    for (int ix = 0; ix < w.nx; ++ix) {
      const std::size_t n = w.index(ix, ip);
      f.line("%.10g,%.10g,%.17g,%.10g\n", w.x_at(ix), w.p_at(ip), field.q[n], logq[n]);
    }
  }
}

void write_current(const CurrentField& current, const CurrentField& classical, const std::string& hash,
                   const std::filesystem::path& path) {
  if (!(current.window == classical.window)) throw std::invalid_argument("write_current: window mismatch");
  CsvFile f(path, hash);
  f.meta("time", current.time);
  f.meta("order", current.order);
  f.header("x,p,re_J,im_J,re_J_cl,im_J_cl");
  const PhaseSpaceWindow& w = current.window;
  for (int ip = 0; ip < w.np; ++ip) {
    for (int ix = 0; ix < w.nx; ++ix) {
      const std::size_t n = w.index(ix, ip);
      f.line("%.10g,%.10g,%.17g,%.17g,%.17g,%.17g\n", w.x_at(ix), w.p_at(ip), current.j[n].real(),
             current.j[n].imag(), classical.j[n].real(), classical.j[n].imag());
    }
  }
}

namespace {

const char* tri(const std::optional<bool>& b) { return b ? (*b ? "1" : "0") : "na"; }

}  // namespace

void write_zeros(const ZeroSearchResult& zeros, const PhaseSpaceConfig& cfg, double time, const std::string& hash,
                 const std::filesystem::path& path) {
  CsvFile f(path, hash);
  f.meta("time", time);
  f.meta("separatrix_energy", separatrix_energy(cfg));
  f.header("x,p,re_z,im_z,residual,iterations,local_q,significant,reproduced,stable,H_cl");
  for (const auto& z : zeros.zeros) {
    f.line("%.17g,%.17g,%.17g,%.17g,%.3e,%d,%.3e,%d,%s,%d,%.17g\n", z.x, z.p, z.z.real(), z.z.imag(), z.residual,
           z.iterations, z.local_q, z.significant ? 1 : 0, tri(z.reproduced), z.stable() ? 1 : 0,
           classical_energy(z.x, z.p, cfg));
  }
}

void write_stagnation(const StagnationReport& report, double time, const std::string& hash,
                      const std::filesystem::path& path) {
  CsvFile f(path, hash);
  f.meta("time", time);
  f.meta("anomalies", report.anomalies);
  f.header("id,x,p,kind,class,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,index,predicted_index,"
           "partner,stable,anomaly,local_q,loop_radius");
  for (const auto& s : report.points) {
    const Classification& c = s.classification;
    f.line("%d,%.17g,%.17g,%s,%s,%.10e,%.10e,%.10e,%.10e,%d,%d,%d,%d,%d,%.3e,%.6g\n", s.id, s.x, s.p,
           std::string(to_string(s.kind)).c_str(), std::string(to_string(c.kind)).c_str(), c.lambda_plus.real(),
           c.lambda_plus.imag(), c.lambda_minus.real(), c.lambda_minus.imag(), s.index, c.predicted_index, s.partner,
           s.stable ? 1 : 0, s.anomaly ? 1 : 0, s.local_q, s.loop_radius);
  }
}

void write_dipoles(const DipolePairing& dipoles, const std::vector<StagnationPoint>& points, double time,
                   const std::string& hash, const std::filesystem::path& path) {
  CsvFile f(path, hash);
  f.meta("time", time);
  f.meta("unpaired", static_cast<double>(dipoles.unpaired.size()));
  f.header("saddle_id,partner_id,saddle_x,saddle_p,partner_x,partner_p,separation");
  for (const auto& d : dipoles.dipoles) {
    const auto& a = points[static_cast<std::size_t>(d.saddle)];
    const auto& b = points[static_cast<std::size_t>(d.partner)];
    f.line("%d,%d,%.17g,%.17g,%.17g,%.17g,%.10g\n", a.id, b.id, a.x, a.p, b.x, b.p, d.separation);
  }
}

void write_contours(const std::vector<EnergyContour>& contours, double time, const std::string& hash,
                    const std::filesystem::path& path) {
  CsvFile f(path, hash);
  f.meta("time", time);
  f.header("level,branch,x,p");
  for (const auto& c : contours) {
    for (std::size_t b = 0; b < c.branches.size(); ++b) {
      for (const auto& pt : c.branches[b]) f.line("%.17g,%zu,%.10g,%.10g\n", c.level, b, pt.x, pt.p);
    }
  }
}

void write_continuity(const ContinuityStudy& study, double time, const std::string& hash,
                      const std::filesystem::path& path) {
  CsvFile f(path, hash);
  f.meta("time", time);
  f.meta("delta", study.delta);
  f.meta("dq_dt_norm", study.dq_dt_norm);
  f.header("kind,n,norm");
  for (std::size_t i = 0; i < study.orders.size(); ++i) {
    f.line("residual,%d,%.10e\n", study.orders[i], study.residual_norms[i]);
  }
  for (std::size_t n = 0; n < study.component_norms.size(); ++n) {
    f.line("component,%zu,%.10e\n", n, study.component_norms[n]);
  }
}

void write_validation(const std::vector<PresetValidation>& rows, const std::string& hash,
                      const std::filesystem::path& path) {
  CsvFile f(path, hash);
  f.meta("tolerance", kPresetTolerance);
  f.header("p0,T_Q_desk,T_Q_paper,difference,pass");
  for (const auto& v : rows) {
    f.line("%.17g,%.17g,%.17g,%.3e,%d\n", v.p0, v.t_q_desk, v.t_q_paper, v.difference, v.pass ? 1 : 0);
  }
}

}  // namespace husimi_flow
