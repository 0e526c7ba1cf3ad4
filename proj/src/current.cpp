#include "husimi_flow/current.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "husimi_flow/coherent.hpp"
#include "husimi_flow/parallel.hpp"

namespace husimi_flow {

namespace {

double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

}  // namespace

double CurrentField::max_abs() const {
  double m = 0.0;
  for (const auto& v : j) m = std::max(m, std::abs(v));
  return m;
}

CurrentTerms current_at_node(complex z, double q, complex amplitude, const complex* reduced_stack, int order,
                             const AveragedHamiltonian& h, const PotentialDerivatives& table,
                             complex* components) {
  const complex inv_ih = complex(0.0, -1.0 / h.config().hbar);
  if (components) std::fill(components, components + order + 1, complex{});
  complex j_sum{};
  complex f_sum{};
  for (int l = 1; l <= order + 1; ++l) {
    complex series{};
    for (int k = 0; k + l <= order + 1; ++k) {
      const complex term = (k % 2 == 0 ? 1.0 : -1.0) / factorial(k + l) * h.mixed_partial(z, k + l, k, table);
      series += term;
      if (components) {
        // d^(l-1) Q / dz^(l-1); the l = 1 entry is Q itself.
        const complex dq = l == 1 ? complex(q) : amplitude * reduced_stack[l - 1];
        components[l + k - 1] += inv_ih * dq * term;
      }
    }
    const complex dq = l == 1 ? complex(q) : amplitude * reduced_stack[l - 1];
    j_sum += dq * series;
    f_sum += reduced_stack[l - 1] * series;
  }
  return {inv_ih * j_sum, inv_ih * f_sum};
}

namespace {

CurrentField build_current(const HusimiField& field, const AveragedHamiltonian& h, int order, bool keep) {
  if (order < 0) throw std::invalid_argument("current: truncation order must be non-negative");
  if (field.order < order) {
    throw std::invalid_argument("current: Husimi derivative stack depth " + std::to_string(field.order) +
                                " below truncation order " + std::to_string(order));
  }
  if (2 * (order + 1) > h.max_order()) {
    throw std::invalid_argument("current: Hamiltonian derivative table too shallow for this order");
  }
  const auto& w = field.window;
  const auto& cfg = h.config();
  CurrentField out;
  out.window = w;
  out.time = field.time;
  out.order = order;
  out.j.resize(w.size());
  out.reduced.resize(w.size());
  if (keep) out.components.assign(static_cast<std::size_t>(order) + 1, std::vector<complex>(w.size()));

  // Potential derivatives depend on x only: one table per window column.
  std::vector<PotentialDerivatives> tables(static_cast<std::size_t>(w.nx));
  for (int ix = 0; ix < w.nx; ++ix) tables[static_cast<std::size_t>(ix)] = h.potential_derivatives(w.x_at(ix), 2 * (order + 1));

  parallel_for(static_cast<std::size_t>(w.np), [&](std::size_t row) {
    const int ip = static_cast<int>(row);
    std::array<complex, kMaxStackOrder + 1> stack{};
    std::array<complex, kMaxStackOrder + 1> comps{};
    for (int ix = 0; ix < w.nx; ++ix) {
      const std::size_t node = w.index(ix, ip);
      for (int m = 0; m <= order; ++m) stack[static_cast<std::size_t>(m)] = field.stack[static_cast<std::size_t>(m)][node];
      const complex z = z_from_xp(w.x_at(ix), w.p_at(ip), cfg);
      const auto terms = current_at_node(z, field.q[node], field.amplitude[node], stack.data(), order, h,
                                         tables[static_cast<std::size_t>(ix)], keep ? comps.data() : nullptr);
      out.j[node] = terms.j;
      out.reduced[node] = terms.reduced;
      if (keep) {
        for (int n = 0; n <= order; ++n) out.components[static_cast<std::size_t>(n)][node] = comps[static_cast<std::size_t>(n)];
      }
    }
  });
  return out;
}

}  // namespace

CurrentField classical_current(const HusimiField& field, const AveragedHamiltonian& h) {
  return build_current(field, h, 0, false);
}

CurrentField quantum_current(const HusimiField& field, const AveragedHamiltonian& h, int order,
                             bool keep_components) {
  return build_current(field, h, order, keep_components);
}

CurrentSampler::CurrentSampler(std::shared_ptr<const HusimiSampler> sampler, AveragedHamiltonian h, int order)
    : sampler_(std::move(sampler)), h_(std::move(h)), order_(order) {
  if (order_ < 0 || order_ > kMaxStackOrder) throw std::invalid_argument("CurrentSampler: bad truncation order");
  if (2 * (order_ + 1) > h_.max_order()) {
    throw std::invalid_argument("CurrentSampler: Hamiltonian derivative table too shallow for this order");
  }
}

CurrentTerms CurrentSampler::evaluate(complex z) const {
  const auto s = sampler_->evaluate(z, order_);
  const auto [x, p] = xp_from_z(z, h_.config());
  const auto table = h_.potential_derivatives(x, 2 * (order_ + 1));
  return current_at_node(z, std::norm(s.amplitude), s.amplitude, s.stack.data(), order_, h_, table);
}

ContinuityResidual continuity_residual(const HusimiField& before, const HusimiField& now,
                                       const HusimiField& after, const CurrentField& current, double dt) {
  if (!(before.window == now.window) || !(after.window == now.window) || !(current.window == now.window)) {
    throw std::invalid_argument("continuity_residual: mismatched windows");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("continuity_residual: dt must be positive");
  const auto& w = now.window;
  const auto& cfg = now.sampler->config();
  // d/da = 2 sx d/dx and d/db = 2 sp d/dp for z = a + i b.
  const double scale_x = 2.0 * cfg.sigma_x() / w.step_x();
  const double scale_p = 2.0 * cfg.sigma_p() / w.step_p();
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  constexpr int r = 4;

  ContinuityResidual out;
  out.window = w;
  out.residual.assign(w.size(), 0.0);
  out.dq_dt.assign(w.size(), 0.0);
  out.divergence.assign(w.size(), 0.0);
  double s_r = 0.0;
  double s_t = 0.0;
  double s_d = 0.0;
  for (int ip = r; ip < w.np - r; ++ip) {
    for (int ix = r; ix < w.nx - r; ++ix) {
      const std::size_t node = w.index(ix, ip);
      double dx = 0.0;
      double dp = 0.0;
      for (int s = 1; s <= r; ++s) {
        dx += c[s - 1] * (current.j[w.index(ix + s, ip)].real() - current.j[w.index(ix - s, ip)].real());
        dp += c[s - 1] * (current.j[w.index(ix, ip + s)].imag() - current.j[w.index(ix, ip - s)].imag());
      }
      const double div = scale_x * dx + scale_p * dp;
      const double dq = (after.q[node] - before.q[node]) / (2.0 * dt);
      out.dq_dt[node] = dq;
      out.divergence[node] = div;
      out.residual[node] = dq + div;
      s_r += (dq + div) * (dq + div);
      s_t += dq * dq;
      s_d += div * div;
    }
  }
  const double cell = w.step_x() * w.step_p();
  out.norm = std::sqrt(s_r * cell);
  out.dq_dt_norm = std::sqrt(s_t * cell);
  out.divergence_norm = std::sqrt(s_d * cell);
  return out;
}

}  // namespace husimi_flow
