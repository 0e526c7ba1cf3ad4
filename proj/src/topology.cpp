#include "husimi_flow/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "husimi_flow/coherent.hpp"
#include "husimi_flow/errors.hpp"
#include "husimi_flow/parallel.hpp"

namespace husimi_flow {

namespace {

struct Partials {
  complex da;  // along Re z
  complex db;  // along Im z
};

Partials central(const VectorSampler& f, complex z0, double h) {
  const complex ea(h, 0.0);
  const complex eb(0.0, h);
  return {(f(z0 + ea) - f(z0 - ea)) / (2.0 * h), (f(z0 + eb) - f(z0 - eb)) / (2.0 * h)};
}

Partials richardson(const Partials& coarse, const Partials& fine) {
  return {(4.0 * fine.da - coarse.da) / 3.0, (4.0 * fine.db - coarse.db) / 3.0};
}

double partials_gap(const Partials& a, const Partials& b) {
  return std::max(std::abs(a.da - b.da), std::abs(a.db - b.db));
}

double partials_scale(const Partials& a) { return std::max(std::abs(a.da), std::abs(a.db)); }

double wrapped_angle(complex from, complex to) { return std::arg(to / from); }

// Clockwise-positive angle accumulated by J along one polygon edge, bisecting
// while consecutive samples differ by more than pi/4.
double edge_rotation(const VectorSampler& f, complex a, complex b, complex fa, complex fb, double floor, int depth) {
  const double d = wrapped_angle(fa, fb);
  if (std::abs(d) <= std::numbers::pi / 4.0 || depth >= 20) return -d;
  const complex m = 0.5 * (a + b);
  const complex fm = f(m);
  if (!(std::abs(fm) > floor)) throw ConvergenceError("current below floor on winding loop");
  return edge_rotation(f, a, m, fa, fm, floor, depth + 1) + edge_rotation(f, m, b, fm, fb, floor, depth + 1);
}

}  // namespace

GradientMatrix gradient_matrix(const VectorSampler& field, complex z0, double step) {
  double h = step;
  for (int attempt = 0; attempt < 6; ++attempt, h *= 0.25) {
    const Partials d1 = central(field, z0, h);
    const Partials d2 = central(field, z0, h / 2.0);
    const Partials d4 = central(field, z0, h / 4.0);
    const Partials r1 = richardson(d1, d2);
    const Partials r2 = richardson(d2, d4);
    const double scale = partials_scale(r2);
    if (partials_gap(r1, r2) <= 1e-6 * scale || scale == 0.0) {
      // J_z = (J_a - i J_b)/2, J_zbar = (J_a + i J_b)/2
      const complex i(0.0, 1.0);
      return {0.5 * (r2.da - i * r2.db), 0.5 * (r2.da + i * r2.db)};
    }
  }
  throw ConvergenceError("gradient step adaptation failed");
}

std::string_view to_string(FlowClass c) {
  switch (c) {
    case FlowClass::saddle: return "saddle";
    case FlowClass::attractive_node: return "attractive_node";
    case FlowClass::repulsive_node: return "repulsive_node";
    case FlowClass::attractive_spiral: return "attractive_spiral";
    case FlowClass::repulsive_spiral: return "repulsive_spiral";
    case FlowClass::vortex: return "vortex";
    case FlowClass::degenerate: return "degenerate";
  }
  return "degenerate";
}

std::string_view to_string(StagnationKind k) { return k == StagnationKind::trivial ? "trivial" : "nontrivial"; }

Classification classify(const GradientMatrix& g, double threshold) {
  Classification out;
  const double tr = g.trace();
  const double det = g.determinant();
  const double eps = threshold * g.norm();
  const complex disc = std::sqrt(complex(tr * tr - 4.0 * det, 0.0));
  out.lambda_plus = 0.5 * (tr + disc);
  out.lambda_minus = 0.5 * (tr - disc);
  if (g.norm() == 0.0 || std::abs(out.lambda_plus - out.lambda_minus) <= eps ||
      std::abs(det) <= eps * g.norm()) {
    out.kind = FlowClass::degenerate;
    out.predicted_index = 0;
    return out;
  }
  const bool real = std::abs(disc.imag()) <= eps;
  if (real) {
    const double lp = out.lambda_plus.real();
    const double lm = out.lambda_minus.real();
    if (lp * lm < 0.0) {
      out.kind = FlowClass::saddle;
    } else {
      out.kind = lp > 0.0 ? FlowClass::repulsive_node : FlowClass::attractive_node;
    }
  } else if (std::abs(tr) <= eps) {
    out.kind = FlowClass::vortex;
  } else {
    out.kind = tr > 0.0 ? FlowClass::repulsive_spiral : FlowClass::attractive_spiral;
  }
  out.predicted_index = out.kind == FlowClass::saddle ? -1 : 1;
  return out;
}

std::vector<complex> circle_loop(complex center, double radius, int n_samples) {
  if (n_samples < 3 || !(radius > 0.0)) throw std::invalid_argument("circle_loop: bad radius or sample count");
  std::vector<complex> loop(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double phi = -2.0 * std::numbers::pi * i / n_samples;
    loop[static_cast<std::size_t>(i)] = center + std::polar(radius, phi);
  }
  return loop;
}

int winding_along(const VectorSampler& field, const std::vector<complex>& clockwise_polygon, double floor) {
  const std::size_t n = clockwise_polygon.size();
  if (n < 3) throw std::invalid_argument("winding_along: polygon needs at least 3 vertices");
  std::vector<complex> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = field(clockwise_polygon[i]);
    if (!(std::abs(values[i]) > floor)) throw ConvergenceError("current below floor on winding loop");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    total += edge_rotation(field, clockwise_polygon[i], clockwise_polygon[j], values[i], values[j], floor, 0);
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

int winding_index(const VectorSampler& field, complex z0, double radius, int n_samples, double relative_floor,
                  int retries) {
  double r = radius;
  for (int attempt = 0;; ++attempt, r *= 0.5) {
    try {
      const auto loop = circle_loop(z0, r, n_samples);
      double peak = 0.0;
      for (const complex z : loop) peak = std::max(peak, std::abs(field(z)));
      return winding_along(field, loop, relative_floor * peak);
    } catch (const ConvergenceError&) {
      if (attempt >= retries) throw;
    }
  }
}

namespace {

struct NewtonOutcome {
  complex z;
  double residual = 0.0;
  bool converged = false;
};

// 2D Newton on f(a + ib) = 0 with a central-difference Jacobian.
NewtonOutcome newton_reduced(const CurrentSampler& sampler, complex start, double scale, const StagnationOptions& opts,
                             const PhaseSpaceWindow& window, const PhaseSpaceConfig& cfg) {
  const double sx = cfg.sigma_x();
  const double sp = cfg.sigma_p();
  const double re_lo = window.x_lo / (2.0 * sx), re_hi = window.x_hi / (2.0 * sx);
  const double im_lo = window.p_lo / (2.0 * sp), im_hi = window.p_hi / (2.0 * sp);
  NewtonOutcome out{start};
  complex z = start;
  complex f = sampler.reduced(z);
  const double f_start = std::abs(f);
  bool settled = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double h = 1e-6;
    const complex fa = (sampler.reduced(z + complex(h, 0.0)) - sampler.reduced(z - complex(h, 0.0))) / (2.0 * h);
    const complex fb = (sampler.reduced(z + complex(0.0, h)) - sampler.reduced(z - complex(0.0, h))) / (2.0 * h);
    const double det = fa.real() * fb.imag() - fb.real() * fa.imag();
    if (det == 0.0 || !std::isfinite(det)) break;
    const double da = -(fb.imag() * f.real() - fb.real() * f.imag()) / det;
    const double db = -(-fa.imag() * f.real() + fa.real() * f.imag()) / det;
    complex dz(da, db);
    if (std::abs(dz) > 0.5) dz *= 0.5 / std::abs(dz);
    z += dz;
    if (z.real() < re_lo || z.real() > re_hi || z.imag() < im_lo || z.imag() > im_hi) break;
    f = sampler.reduced(z);
    if (std::abs(dz) < 1e-10) {
      settled = true;
      break;
    }
  }
  out.z = z;
  out.residual = std::abs(f) / scale;
  out.converged = out.residual <= opts.tolerance || (settled && std::abs(f) <= opts.tolerance * f_start);
  return out;
}

}  // namespace

StagnationReport find_stagnation_points(const CurrentField& current, const HusimiField& husimi,
                                        const CurrentSampler& sampler, const ZeroSearchResult& zeros,
                                        const StagnationOptions& opts) {
  if (!(current.window == husimi.window)) throw std::invalid_argument("find_stagnation_points: window mismatch");
  const PhaseSpaceWindow& w = husimi.window;
  const PhaseSpaceConfig& cfg = sampler.husimi().config();
  const double qmax = husimi.max_q();
  const double jmax = current.max_abs();
  const double cell = std::min(husimi.cell_re(), husimi.cell_im());

  StagnationReport report;
  std::vector<StagnationPoint> pts;
  for (const auto& zero : zeros.zeros) {
    if (!zero.significant) continue;
    StagnationPoint s;
    s.z = zero.z;
    s.x = zero.x;
    s.p = zero.p;
    s.kind = StagnationKind::trivial;
    s.local_q = zero.local_q;
    s.stable = zero.stable();
    pts.push_back(s);
  }

  // non-trivial seeds: local minima of |f| where Q is unmasked
  double fmax = 0.0;
  for (std::size_t n = 0; n < husimi.q.size(); ++n) {
    if (husimi.q[n] >= opts.mask * qmax) fmax = std::max(fmax, std::abs(current.reduced[n]));
  }
  std::vector<complex> seeds;
  for (int ip = 1; ip + 1 < w.np; ++ip) {
    for (int ix = 1; ix + 1 < w.nx; ++ix) {
      const std::size_t node = w.index(ix, ip);
      if (husimi.q[node] < opts.mask * qmax) continue;
      const double v = std::abs(current.reduced[node]);
      bool minimum = true;
      for (int dp = -1; dp <= 1 && minimum; ++dp) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dp == 0) continue;
          if (std::abs(current.reduced[w.index(ix + dx, ip + dp)]) < v) {
            minimum = false;
            break;
          }
        }
      }
      if (minimum) seeds.push_back(husimi.z_at(ix, ip));
    }
  }
  // partners of zeros sit close by and are often finer than the grid
  for (const auto& s : pts) {
    for (int k = 0; k < 8; ++k) seeds.push_back(s.z + std::polar(cell, 2.0 * std::numbers::pi * k / 8.0));
  }
  std::vector<NewtonOutcome> refined(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    refined[i] = newton_reduced(sampler, seeds[i], fmax, opts, w, cfg);
  });
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const NewtonOutcome& r = refined[i];
    if (!r.converged) {
      report.rejected_candidates.push_back(seeds[i]);
      continue;
    }
    const PhasePoint xp = xp_from_z(r.z, cfg);
    if (xp.x < w.x_lo || xp.x > w.x_hi || xp.p < w.p_lo || xp.p > w.p_hi) {
      report.rejected_candidates.push_back(seeds[i]);
      continue;
    }
    const double local_q = neighbourhood_q(husimi, xp.x, xp.p, opts.neighbourhood) / qmax;
    if (local_q < opts.mask) {
      report.rejected_candidates.push_back(seeds[i]);
      continue;
    }
    bool duplicate = false;
    for (const auto& s : pts) {
      if (s.kind == StagnationKind::nontrivial && std::abs(s.z - r.z) < 0.5 * cell) duplicate = true;
    }
    if (duplicate) continue;
    StagnationPoint s;
    s.z = r.z;
    s.x = xp.x;
    s.p = xp.p;
    s.kind = StagnationKind::nontrivial;
    s.local_q = local_q;
    pts.push_back(s);
  }

  std::sort(pts.begin(), pts.end(), [](const StagnationPoint& a, const StagnationPoint& b) {
    return a.x != b.x ? a.x < b.x : a.p < b.p;
  });

  const VectorSampler j = [&sampler](complex z) { return sampler.current(z); };
  parallel_for(pts.size(), [&](std::size_t i) {
    StagnationPoint& s = pts[i];
    s.id = static_cast<int>(i);
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k != i) nearest = std::min(nearest, std::abs(pts[k].z - s.z));
    }
    s.loop_radius = std::min(opts.loop_cells * cell, 0.45 * nearest);
    s.residual = jmax > 0.0 ? std::abs(sampler.current(s.z)) / jmax : 0.0;
    try {
      s.gradient = gradient_matrix(j, s.z, std::min(1e-3, 0.25 * s.loop_radius));
      s.classification = classify(s.gradient, opts.degeneracy);
    } catch (const ConvergenceError&) {
      s.classification = Classification{};
    }
    // a loop that also encloses an unresolved neighbour reads the pair sum;
    // shrink until the loop agrees with the eigenvalues or retries run out
    bool ok = false;
    for (int attempt = 0; attempt <= opts.shrink_retries; ++attempt) {
      try {
        s.index = winding_index(j, s.z, s.loop_radius, opts.loop_samples, opts.current_floor, opts.shrink_retries);
        ok = true;
      } catch (const ConvergenceError&) {
        ok = false;
      }
      if (ok && s.index == s.classification.predicted_index) break;
      if (attempt < opts.shrink_retries) s.loop_radius *= 0.5;
    }
    if (!ok) {
      s.index = 0;
      s.anomaly = true;
    }
    if (s.classification.predicted_index != s.index) s.anomaly = true;
    if (s.kind == StagnationKind::trivial && s.classification.kind != FlowClass::saddle) s.anomaly = true;
  });
  report.anomalies = static_cast<int>(std::count_if(pts.begin(), pts.end(), [](const auto& s) { return s.anomaly; }));
  report.points = std::move(pts);
  return report;
}

DipolePairing pair_dipoles(std::vector<StagnationPoint>& points, double max_sep) {
  struct Candidate {
    double d;
    std::size_t a;
    std::size_t b;
  };
  std::vector<Candidate> cands;
  for (std::size_t a = 0; a < points.size(); ++a) {
    points[a].partner = -1;
    if (points[a].index != -1) continue;
    for (std::size_t b = 0; b < points.size(); ++b) {
      if (points[b].index != 1) continue;
      const double d = std::abs(points[a].z - points[b].z);
      if (d <= max_sep) cands.push_back({d, a, b});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& l, const Candidate& r) { return l.d < r.d; });
  DipolePairing out;
  for (const auto& c : cands) {
    if (points[c.a].partner >= 0 || points[c.b].partner >= 0) continue;
    points[c.a].partner = static_cast<int>(c.b);
    points[c.b].partner = static_cast<int>(c.a);
    out.dipoles.push_back({static_cast<int>(c.a), static_cast<int>(c.b), c.d});
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].partner < 0) out.unpaired.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<complex> rectangle_loop(complex lo, complex hi, int n_per_side) {
  if (n_per_side < 1 || !(hi.real() > lo.real()) || !(hi.imag() > lo.imag())) {
    throw std::invalid_argument("rectangle_loop: empty rectangle");
  }
  const complex corners[4] = {lo, {lo.real(), hi.imag()}, hi, {hi.real(), lo.imag()}};
  std::vector<complex> loop;
  loop.reserve(static_cast<std::size_t>(4 * n_per_side));
  for (int side = 0; side < 4; ++side) {
    const complex a = corners[side];
    const complex b = corners[(side + 1) % 4];
    for (int i = 0; i < n_per_side; ++i) loop.push_back(a + (b - a) * (static_cast<double>(i) / n_per_side));
  }
  return loop;
}

bool inside_polygon(const std::vector<complex>& polygon, complex z) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const complex a = polygon[i];
    const complex b = polygon[j];
    if ((a.imag() > z.imag()) != (b.imag() > z.imag()) &&
        z.real() < (b.real() - a.real()) * (z.imag() - a.imag()) / (b.imag() - a.imag()) + a.real()) {
      inside = !inside;
    }
  }
  return inside;
}

int enclosed_index(const std::vector<StagnationPoint>& points, const std::vector<complex>& polygon) {
  int sum = 0;
  for (const auto& s : points) {
    if (inside_polygon(polygon, s.z)) sum += s.index;
  }
  return sum;
}

}  // namespace husimi_flow
