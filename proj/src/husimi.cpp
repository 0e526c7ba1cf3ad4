#include "husimi_flow/husimi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "husimi_flow/coherent.hpp"
#include "husimi_flow/parallel.hpp"

namespace husimi_flow {

HusimiSampler::HusimiSampler(WavefunctionGrid psi, const PhaseSpaceConfig& cfg)
    : psi_(std::move(psi)), cfg_(cfg) {
  cfg_.validate();
  if (psi_.samples.empty()) throw std::invalid_argument("HusimiSampler: empty wavefunction");
}

HusimiSample HusimiSampler::evaluate(complex z, int max_order) const {
  if (max_order < 0 || max_order > kMaxStackOrder) {
    throw std::out_of_range("HusimiSampler: derivative order " + std::to_string(max_order) +
                            " outside [0, " + std::to_string(kMaxStackOrder) + "]");
  }
  HusimiSample out;
  out.order = max_order;

  const double sx = cfg_.sigma_x();
  const auto [xc, pc] = xp_from_z(z, cfg_);
  const double kappa = pc / cfg_.hbar;
  // He_m(u) exp(-u^2/4) is below 1e-20 beyond this cut for m up to max_order.
  const double u_cut = 18.0 + 0.6 * std::max(0, max_order - 10);

  const std::size_t n = psi_.size();
  const double x_first = psi_.x_min;
  const double x_last = psi_.x_at(n - 1);
  out.kernel_mass_outside = 0.5 * std::erfc((xc - x_first) / (sx * std::numbers::sqrt2)) +
                            0.5 * std::erfc((x_last - xc) / (sx * std::numbers::sqrt2));

  const double lo = std::ceil((xc - u_cut * sx - x_first) / psi_.dx);
  const double hi = std::floor((xc + u_cut * sx - x_first) / psi_.dx);
  if (hi < 0.0 || lo > static_cast<double>(n - 1)) return out;
  const auto i_lo = static_cast<std::size_t>(std::max(lo, 0.0));
  const auto i_hi = static_cast<std::size_t>(std::min(hi, static_cast<double>(n - 1)));

  const double norm = std::pow(2.0 * std::numbers::pi * sx * sx, -0.25);
  std::array<complex, kMaxStackOrder + 1> sums{};
  const complex phase_step = std::polar(1.0, kappa * psi_.dx);
  complex phase;
  for (std::size_t i = i_lo; i <= i_hi; ++i) {
    const double x = psi_.x_at(i);
    const double u = (x - xc) / sx;
    // Resynchronise the phase recurrence periodically to bound drift.
    if ((i - i_lo) % 64 == 0) {
      phase = std::polar(1.0, kappa * (x - xc));
    } else {
      phase *= phase_step;
    }
    const complex s = norm * std::exp(-0.25 * u * u) * std::conj(psi_.samples[i]) * phase;
    sums[0] += s;
    if (max_order >= 1) {
      double he_prev = 1.0;
      double he = u;
      sums[1] += s * he;
      for (int m = 1; m < max_order; ++m) {
        const double he_next = u * he - m * he_prev;
        he_prev = he;
        he = he_next;
        sums[static_cast<std::size_t>(m + 1)] += s * he;
      }
    }
  }
  const complex c = std::polar(psi_.dx, kappa * xc - z.real() * z.imag());
  for (int m = 0; m <= max_order; ++m) out.stack[static_cast<std::size_t>(m)] = c * sums[static_cast<std::size_t>(m)];
  out.amplitude = std::conj(out.stack[0]);
  return out;
}

complex husimi_amplitude(const WavefunctionGrid& psi, complex z, const PhaseSpaceConfig& cfg) {
  return HusimiSampler(psi, cfg).amplitude(z);
}

std::vector<complex> amplitude_z_derivatives(const WavefunctionGrid& psi, complex z, int max_order,
                                             const PhaseSpaceConfig& cfg) {
  const auto s = HusimiSampler(psi, cfg).evaluate(z, max_order);
  return {s.stack.begin(), s.stack.begin() + max_order + 1};
}

complex HusimiField::z_at(int ix, int ip) const {
  return z_from_xp(window.x_at(ix), window.p_at(ip), sampler->config());
}

double HusimiField::max_q() const { return q.empty() ? 0.0 : *std::max_element(q.begin(), q.end()); }

double HusimiField::normalization() const {
  double s = 0.0;
  for (const double v : q) s += v;
  return s * window.step_x() * window.step_p() / (2.0 * std::numbers::pi * sampler->config().hbar);
}

double HusimiField::cell_re() const { return window.step_x() / (2.0 * sampler->config().sigma_x()); }
double HusimiField::cell_im() const { return window.step_p() / (2.0 * sampler->config().sigma_p()); }

HusimiField husimi_field(const WavefunctionGrid& psi, const PhaseSpaceWindow& window,
                         const PhaseSpaceConfig& cfg, std::optional<int> order) {
  window.validate();
  HusimiField field;
  field.window = window;
  field.time = psi.time;
  field.order = order.value_or(cfg.trunc_order);
  field.sampler = std::make_shared<const HusimiSampler>(psi, cfg);
  const std::size_t nodes = window.size();
  field.amplitude.resize(nodes);
  field.q.resize(nodes);
  field.stack.assign(static_cast<std::size_t>(field.order) + 1, std::vector<complex>(nodes));
  std::vector<double> outside(static_cast<std::size_t>(window.np), 0.0);

  const auto& sampler = *field.sampler;
  parallel_for(static_cast<std::size_t>(window.np), [&](std::size_t row) {
    const int ip = static_cast<int>(row);
    for (int ix = 0; ix < window.nx; ++ix) {
      const std::size_t node = window.index(ix, ip);
      const auto s = sampler.evaluate(z_from_xp(window.x_at(ix), window.p_at(ip), cfg), field.order);
      field.amplitude[node] = s.amplitude;
      field.q[node] = std::norm(s.amplitude);
      for (int m = 0; m <= field.order; ++m) field.stack[static_cast<std::size_t>(m)][node] = s.stack[static_cast<std::size_t>(m)];
      outside[row] = std::max(outside[row], s.kernel_mass_outside);
    }
  });
  field.max_kernel_mass_outside = *std::max_element(outside.begin(), outside.end());
  return field;
}

std::vector<double> log_density(const HusimiField& field) {
  const double floor = field.max_q() * 1e-16;
  std::vector<double> out(field.q.size());
  std::transform(field.q.begin(), field.q.end(), out.begin(),
                 [floor](double v) { return std::log10(std::max(v, floor)); });
  return out;
}

HusimiZero refine_zero(const HusimiSampler& sampler, complex start, const ZeroSearchOptions& opts,
                       double amplitude_scale) {
  HusimiZero zero;
  complex z = start;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const auto s = sampler.evaluate(z, 1);
    // theta'/theta expressed through the reduced stack: R_1/R_0 + conj(z).
    const complex den = s.stack[1] + std::conj(z) * s.stack[0];
    if (den == complex{}) break;
    complex dz = -s.stack[0] / den;
    if (std::abs(dz) > 1.0) dz *= 1.0 / std::abs(dz);
    z += dz;
    if (std::abs(dz) < 1e-14 * (1.0 + std::abs(z))) {
      ++it;
      break;
    }
  }
  zero.z = z;
  zero.iterations = it;
  const auto [x, p] = xp_from_z(z, sampler.config());
  zero.x = x;
  zero.p = p;
  zero.residual = std::abs(sampler.amplitude(z)) / amplitude_scale;
  zero.status = zero.residual < opts.tolerance ? ZeroStatus::converged : ZeroStatus::not_converged;
  return zero;
}

double neighbourhood_q(const HusimiField& field, double x, double p, int radius) {
  const PhaseSpaceWindow& w = field.window;
  const int cx = static_cast<int>(std::lround((x - w.x_lo) / w.step_x()));
  const int cp = static_cast<int>(std::lround((p - w.p_lo) / w.step_p()));
  double local = 0.0;
  for (int ip = std::max(0, cp - radius); ip <= std::min(w.np - 1, cp + radius); ++ip) {
    for (int ix = std::max(0, cx - radius); ix <= std::min(w.nx - 1, cx + radius); ++ix) {
      local = std::max(local, field.q[w.index(ix, ip)]);
    }
  }
  return local;
}

ZeroSearchResult find_zeros(const HusimiField& field, const ZeroSearchOptions& opts) {
  const auto& w = field.window;
  const double qmax = field.max_q();
  ZeroSearchResult result;
  if (qmax <= 0.0) return result;
  const double scale = std::sqrt(qmax);

  std::vector<HusimiZero> found;
  for (int ip = 1; ip + 1 < w.np; ++ip) {
    for (int ix = 1; ix + 1 < w.nx; ++ix) {
      const double qc = field.q[w.index(ix, ip)];
      bool minimum = true;
      for (int dp = -1; dp <= 1 && minimum; ++dp) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dp == 0) continue;
          const double qn = field.q[w.index(ix + dx, ip + dp)];
          // Strict on the "earlier" half of the stencil so plateaus seed once.
          if (qn < qc || (qn == qc && (dp < 0 || (dp == 0 && dx < 0)))) {
            minimum = false;
            break;
          }
        }
      }
      if (!minimum) continue;
      HusimiZero zero = refine_zero(*field.sampler, field.z_at(ix, ip), opts, scale);
      const bool inside = zero.x >= w.x_lo && zero.x <= w.x_hi && zero.p >= w.p_lo && zero.p <= w.p_hi;
      if (zero.status == ZeroStatus::converged && !inside) zero.status = ZeroStatus::outside_window;
      found.push_back(zero);
    }
  }

  // Deeper residual wins among duplicates.
  std::stable_sort(found.begin(), found.end(),
                   [](const HusimiZero& a, const HusimiZero& b) { return a.residual < b.residual; });
  const double min_sep = 0.5 * std::min(field.cell_re(), field.cell_im());
  for (auto& zero : found) {
    if (zero.status != ZeroStatus::converged) {
      result.rejected.push_back(zero);
      continue;
    }
    const bool duplicate = std::any_of(result.zeros.begin(), result.zeros.end(), [&](const HusimiZero& kept) {
      return std::abs(kept.z - zero.z) < min_sep;
    });
    if (duplicate) {
      zero.status = ZeroStatus::duplicate;
      result.rejected.push_back(zero);
      continue;
    }
    zero.local_q = neighbourhood_q(field, zero.x, zero.p, opts.neighbourhood) / qmax;
    zero.significant = zero.local_q >= opts.significance;
    result.zeros.push_back(zero);
  }
  const auto by_position = [](const HusimiZero& a, const HusimiZero& b) {
    return a.x != b.x ? a.x < b.x : a.p < b.p;
  };
  std::sort(result.zeros.begin(), result.zeros.end(), by_position);
  std::sort(result.rejected.begin(), result.rejected.end(), by_position);
  return result;
}

void check_reproducibility(std::vector<HusimiZero>& zeros, const HusimiSampler& reference, double max_shift,
                           double amplitude_scale, const ZeroSearchOptions& opts) {
  for (auto& zero : zeros) {
    const HusimiZero again = refine_zero(reference, zero.z, opts, amplitude_scale);
    zero.reproduced = again.status == ZeroStatus::converged && std::abs(again.z - zero.z) < max_shift;
  }
}

}  // namespace husimi_flow
