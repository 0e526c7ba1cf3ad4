#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "husimi_flow/coherent.hpp"
#include "husimi_flow/current.hpp"
#include "husimi_flow/experiment.hpp"
#include "husimi_flow/propagator.hpp"

using namespace husimi_flow;

namespace {

WavefunctionGrid scattered(const RunConfig& rc, double t) {
  return evolve(initial_coherent_state(rc.x0, rc.p0, rc.physics), t, {}, rc.physics).back();
}

PhaseSpaceWindow small_window() { return {-1.0, 0.6, -0.2, 2.4, 60, 60}; }

}  // namespace

TEST_CASE("order zero is the classical current") {
  RunConfig rc = desk_preset();
  const auto psi = scattered(rc, 2.1);
  const HusimiField field = husimi_field(psi, small_window(), rc.physics, 2);
  const AveragedHamiltonian h(rc.physics);
  const CurrentField cl = classical_current(field, h);
  const CurrentField q0 = quantum_current(field, h, 0);
  for (std::size_t i = 0; i < cl.j.size(); ++i) CHECK(cl.j[i] == q0.j[i]);

  // Q dH/d(conj z) / (i hbar) with the derivative taken by differencing H
  const double e = 1e-4;
  for (int ip = 5; ip < 60; ip += 11) {
    for (int ix = 3; ix < 60; ix += 13) {
      const complex z = field.z_at(ix, ip);
      const double ha = (h.value(z + e) - h.value(z - e)) / (2 * e);
      const double hb = (h.value(z + complex(0, e)) - h.value(z - complex(0, e))) / (2 * e);
      const complex hzbar = 0.5 * complex(ha, hb);
      const complex ref = field.q[field.window.index(ix, ip)] * hzbar / complex(0.0, rc.physics.hbar);
      CHECK(std::abs(cl.j[field.window.index(ix, ip)] - ref) <= 1e-6 * cl.max_abs());
    }
  }
}

TEST_CASE("harmonic current is rigid rotation at every order") {
  RunConfig rc = desk_preset();
  rc.physics.potential = PotentialKind::harmonic;
  rc.physics.trunc_order = 6;
  const auto psi = initial_coherent_state(0.3, 0.2, rc.physics);
  const PhaseSpaceWindow w{-0.2, 0.8, -0.3, 0.7, 30, 30};
  const HusimiField field = husimi_field(psi, w, rc.physics, 6);
  const AveragedHamiltonian h(rc.physics);
  const CurrentField cl = classical_current(field, h);
  for (const int n : {1, 3, 6}) {
    const CurrentField q = quantum_current(field, h, n);
    for (std::size_t i = 0; i < q.j.size(); ++i) {
      const int ix = static_cast<int>(i % 30), ip = static_cast<int>(i / 30);
      const complex expected = complex(0.0, -rc.physics.omega) * field.z_at(ix, ip) * field.q[i];
      CHECK(std::abs(q.j[i] - expected) <= 1e-12 * cl.max_abs());
      CHECK(std::abs(q.j[i] - cl.j[i]) <= 1e-12 * cl.max_abs());
    }
  }
}

TEST_CASE("components add up to the total and the current vanishes at zeros") {
  RunConfig rc = desk_preset();
  const auto psi = scattered(rc, 2.1);
  const HusimiField field = husimi_field(psi, rc.window, rc.physics, 6);
  const AveragedHamiltonian h(rc.physics);
  const CurrentField q = quantum_current(field, h, 6, true);
  REQUIRE(q.components.size() == 7);
  for (std::size_t i = 0; i < q.j.size(); i += 97) {
    complex sum{};
    for (const auto& c : q.components) sum += c[i];
    CHECK(std::abs(sum - q.j[i]) <= 1e-13 * q.max_abs());
  }
  const CurrentSampler sampler(field.sampler, h, 6);
  int checked = 0;
  for (const auto& zero : find_zeros(field).zeros) {
    if (!zero.significant) continue;
    ++checked;
    CHECK(std::abs(sampler.current(zero.z)) < 1e-8 * q.max_abs());
    CHECK(std::abs(sampler.reduced(zero.z)) > 0.0);
  }
  CHECK(checked >= 3);
}

TEST_CASE("continuity") {
  SUBCASE("free packet is exact at first order") {
    PhaseSpaceConfig cfg = desk_preset().physics;
    cfg.potential = PotentialKind::free;
    const auto psi = initial_coherent_state(0.0, 1.0, cfg);
    const double sx = cfg.sigma_x(), sp = cfg.sigma_p();
    const PhaseSpaceWindow w{-5 * sx, 5 * sx, 1.0 - 5 * sp, 1.0 + 5 * sp, 60, 60};
    const auto study = continuity_study(psi, w, cfg, {0, 1}, 1e-4);
    CHECK(study.residual_norms[1] < 1e-4 * study.dq_dt_norm);
    CHECK(study.residual_norms[0] > 1e-2 * study.dq_dt_norm);
  }
  SUBCASE("harmonic flow is exact at every order") {
    PhaseSpaceConfig cfg = desk_preset().physics;
    cfg.potential = PotentialKind::harmonic;
    const auto psi = initial_coherent_state(0.4, 0.0, cfg);
    const double sx = cfg.sigma_x(), sp = cfg.sigma_p();
    const PhaseSpaceWindow w{0.4 - 5 * sx, 0.4 + 5 * sx, -5 * sp, 5 * sp, 60, 60};
    const auto study = continuity_study(psi, w, cfg, {0, 2}, 1e-4);
    for (const double r : study.residual_norms) CHECK(r < 1e-4 * study.dq_dt_norm);
  }
  SUBCASE("stationary state has no time change and no divergence") {
    PhaseSpaceConfig cfg = desk_preset().physics;
    cfg.potential = PotentialKind::harmonic;
    const double sx = cfg.sigma_x(), sp = cfg.sigma_p();
    const PhaseSpaceWindow w{-6 * sx, 6 * sx, -6 * sp, 6 * sp, 61, 61};
    const AveragedHamiltonian h(cfg);
    SplitOperatorPropagator prop(cfg);
    const auto pieces = [&](const WavefunctionGrid& psi) {
      WavefunctionGrid before = psi, after = psi;
      prop.advance(before, -1e-4);
      prop.advance(after, 1e-4);
      const HusimiField now = husimi_field(psi, w, cfg, 2);
      return continuity_residual(husimi_field(before, w, cfg, 0), now, husimi_field(after, w, cfg, 0),
                                 quantum_current(now, h, 2), 1e-4);
    };
    const auto ground = pieces(initial_coherent_state(0.0, 0.0, cfg));
    const auto moving = pieces(initial_coherent_state(2 * sx, 0.0, cfg));
    CHECK(ground.dq_dt_norm < 1e-8 * moving.dq_dt_norm);
    CHECK(ground.divergence_norm < 1e-6 * moving.divergence_norm);
    CHECK(moving.norm < 1e-4 * moving.dq_dt_norm);
  }
  SUBCASE("barrier residual falls with the order") {
    RunConfig rc = desk_preset();
    rc.physics.trunc_order = 10;
    const auto psi = scattered(rc, 2.1);
    const auto study = continuity_study(psi, rc.window, rc.physics, {0, 2, 6, 10}, 1e-4);
    REQUIRE(study.residual_norms.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(study.residual_norms[i] < study.residual_norms[i - 1]);
    CHECK(study.residual_norms[3] < 1e-5 * study.dq_dt_norm);
    REQUIRE(study.component_norms.size() == 11);
    for (std::size_t n = 1; n < study.component_norms.size(); ++n) {
      CHECK(study.component_norms[n] < study.component_norms[n - 1]);
    }
  }
}

TEST_CASE("hbar scaling of the current components") {
  // The same initial packet at two values of hbar; the L2 norm of the
  // hbar^n component shrinks roughly like hbar^ceil(n/2).
  std::vector<std::vector<double>> norms;
  for (const double hbar : {0.01, 0.005}) {
    RunConfig rc = desk_preset();
    rc.physics.hbar = hbar;
    rc.physics.dx = 0.0025;
    rc.physics.trunc_order = 4;
    norms.push_back(continuity_study(scattered(rc, 2.1), rc.window, rc.physics, {4}, 1e-4).component_norms);
  }
  std::vector<double> slope;
  for (std::size_t n = 0; n < 5; ++n) slope.push_back(std::log2(norms[0][n] / norms[1][n]));
  CHECK(std::abs(slope[0]) < 0.1);
  CHECK(slope[1] == doctest::Approx(1.0).epsilon(0.2));
  CHECK(slope[2] == doctest::Approx(1.0).epsilon(0.2));
  CHECK(slope[3] > 1.3);
  CHECK(slope[4] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("argument checks") {
  const PhaseSpaceConfig cfg = desk_preset().physics;
  const auto psi = initial_coherent_state(0.0, 0.0, cfg);
  const HusimiField field = husimi_field(psi, {-0.5, 0.5, -0.5, 0.5, 10, 10}, cfg, 2);
  const AveragedHamiltonian h(cfg);
  CHECK_THROWS_AS(quantum_current(field, h, 3), std::invalid_argument);
  CHECK_THROWS_AS(quantum_current(field, h, -1), std::invalid_argument);
  CHECK_THROWS_AS(CurrentSampler(field.sampler, h, 7), std::invalid_argument);
  const HusimiField other = husimi_field(psi, {-0.5, 0.5, -0.5, 0.6, 10, 10}, cfg, 0);
  const CurrentField j = classical_current(field, h);
  CHECK_THROWS_AS(continuity_residual(field, field, other, j, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(continuity_residual(field, field, field, j, 0.0), std::invalid_argument);
}
