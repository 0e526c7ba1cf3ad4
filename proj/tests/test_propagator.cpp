#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "husimi_flow/errors.hpp"
#include "husimi_flow/propagator.hpp"

using namespace husimi_flow;

namespace {

// <p> from a direct continuous Fourier sum over a momentum band around p0.
double mean_p(const WavefunctionGrid& psi, const PhaseSpaceConfig& cfg, double p0) {
  const double band = 12.0 * cfg.sigma_p();
  const int n = 600;
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double p = p0 - band + 2.0 * band * k / n;
    complex phi = 0.0;
    for (std::size_t i = 0; i < psi.samples.size(); ++i) {
      phi += psi.samples[i] * std::exp(complex(0.0, -p * psi.x_at(i) / cfg.hbar));
    }
    num += p * std::norm(phi);
    den += std::norm(phi);
  }
  return num / den;
}

}  // namespace

TEST_CASE("initial coherent state") {
  const PhaseSpaceConfig cfg;  // appendix grid
  const WavefunctionGrid psi = initial_coherent_state(-4.0, 1.8, cfg);
  CHECK(psi.samples.size() == 8000);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(psi.mean_x() == doctest::Approx(-4.0).epsilon(1e-8));
  SplitOperatorPropagator prop(cfg);
  CHECK(prop.mean_momentum(psi) == doctest::Approx(1.8).epsilon(1e-8));
  CHECK(mean_p(psi, cfg, 1.8) == doctest::Approx(1.8).epsilon(1e-8));

  const WavefunctionGrid g = initial_coherent_state(0.0, 0.0, cfg);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < g.samples.size(); ++i) {
    CHECK(g.samples[i].imag() == 0.0);
    CHECK(g.samples[i].real() >= 0.0);
    if (std::abs(g.samples[i]) > std::abs(g.samples[peak])) peak = i;
  }
  CHECK(g.x_at(peak) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(initial_coherent_state(-9.9, 0.0, cfg), std::invalid_argument);
  PhaseSpaceConfig tight = cfg;
  tight.boundary_floor = 1e-300;
  CHECK_THROWS_AS(initial_coherent_state(-9.0, 0.0, tight), BoundaryContaminationError);
}

TEST_CASE("free packet follows Ehrenfest") {
  PhaseSpaceConfig cfg;
  cfg.potential = PotentialKind::free;
  cfg.dx = 0.01;
  WavefunctionGrid psi = initial_coherent_state(-4.0, 1.5, cfg);
  SplitOperatorPropagator prop(cfg);
  double x = psi.mean_x();
  for (int i = 0; i < 50; ++i) {
    prop.advance(psi);
    const double next = psi.mean_x();
    CHECK(next - x == doctest::Approx(1.5 * cfg.dt).epsilon(1e-9));
    x = next;
  }
}

TEST_CASE("harmonic coherent state returns after one period") {
  PhaseSpaceConfig cfg;
  cfg.potential = PotentialKind::harmonic;
  cfg.dx = 0.01;
  cfg.x_min = -5.0;
  cfg.x_max = 5.0;
  const int steps = 628;
  cfg.dt = 2.0 * std::numbers::pi / steps;
  const WavefunctionGrid psi0 = initial_coherent_state(1.0, 0.5, cfg);
  WavefunctionGrid psi = psi0;
  SplitOperatorPropagator prop(cfg);
  for (int i = 0; i < steps; ++i) prop.advance(psi);
  CHECK(fidelity(psi, psi0) >= 1.0 - 1e-6);
}

TEST_CASE("norm and reversibility") {
  RunConfig rc = desk_preset();
  const PhaseSpaceConfig& cfg = rc.physics;
  const WavefunctionGrid psi0 = initial_coherent_state(-4.0, 1.8, cfg);
  WavefunctionGrid psi = psi0;
  SplitOperatorPropagator prop(cfg);
  double worst = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double before = psi.norm();
    prop.advance(psi);
    CHECK(std::abs(psi.norm() - before) < 1e-12);
    worst = std::max(worst, std::abs(psi.norm() - 1.0));
  }
  CHECK(worst < 1e-9);
  for (int i = 0; i < 400; ++i) prop.advance(psi, -cfg.dt);
  CHECK(psi.time == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fidelity(psi, psi0) >= 1.0 - 1e-8);
}

TEST_CASE("norm drift over 1000 steps") {
  PhaseSpaceConfig cfg;
  cfg.potential = PotentialKind::harmonic;
  cfg.dx = 0.01;
  WavefunctionGrid psi = initial_coherent_state(-2.0, 1.2, cfg);
  SplitOperatorPropagator prop(cfg);
  for (int i = 0; i < 1000; ++i) prop.advance(psi);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-9);
}

TEST_CASE("second-order splitting") {
  PhaseSpaceConfig cfg;
  cfg.dx = 0.01;
  const WavefunctionGrid psi0 = initial_coherent_state(-2.0, 1.8, cfg);
  const double t = 1.2;
  const auto run = [&](double dt) {
    PhaseSpaceConfig c = cfg;
    c.dt = dt;
    return evolve(psi0, t, {}, c).back();
  };
  const WavefunctionGrid ref = run(0.01 / 16.0);
  const double d1 = 1.0 - fidelity(run(0.02), ref);
  const double d2 = 1.0 - fidelity(run(0.01), ref);
  // infidelity goes as the square of the amplitude error: dt^4
  const double ratio = std::sqrt(d1 / d2);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("evolve snapshots") {
  RunConfig rc = desk_preset();
  const PhaseSpaceConfig& cfg = rc.physics;
  const WavefunctionGrid psi0 = initial_coherent_state(-4.0, 1.8, cfg);

  const auto only_final = evolve(psi0, 0.5, {}, cfg);
  REQUIRE(only_final.size() == 1);
  CHECK(only_final[0].time == doctest::Approx(0.5));

  const auto identity = evolve(psi0, 0.0, {}, cfg);
  REQUIRE(identity.size() == 1);
  CHECK(identity[0].samples == psi0.samples);

  const auto snaps = evolve(psi0, 2.5, {2.1, 1.7, 2.5, 1.9, 2.3}, cfg);
  REQUIRE(snaps.size() == 5);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    CHECK(snaps[i].time == doctest::Approx(1.7 + 0.2 * static_cast<double>(i)).epsilon(1e-12));
    CHECK(std::abs(snaps[i].norm() - 1.0) < 1e-10);
  }
  // stepping is deterministic: the 2.1 snapshot equals a direct run
  CHECK(evolve(psi0, 2.1, {}, cfg).back().samples == snaps[2].samples);

  CHECK_THROWS_AS(evolve(psi0, 1.0, {0.505}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(evolve(psi0, 1.0, {1.5}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(step_count(0.0, 0.015, 0.01), std::invalid_argument);
  CHECK(step_count(0.0, 2.1, 0.01) == 210);
}

TEST_CASE("boundary monitor") {
  PhaseSpaceConfig cfg;
  cfg.potential = PotentialKind::free;
  cfg.dx = 0.01;
  WavefunctionGrid psi = initial_coherent_state(8.0, 2.0, cfg);
  SplitOperatorPropagator prop(cfg);
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 200; ++i) prop.advance(psi);
      }(),
      BoundaryContaminationError);
}

TEST_CASE("wavefunction file round trip is bit exact") {
  RunConfig rc = desk_preset();
  const auto psi = evolve(initial_coherent_state(-4.0, 1.8, rc.physics), 0.37, {}, rc.physics).back();
  const auto path = std::filesystem::temp_directory_path() / "husimi_flow_psi_roundtrip.txt";
  write_wavefunction(psi, config_hash(rc), path);
  std::string hash;
  const WavefunctionGrid back = read_wavefunction(path, &hash);
  CHECK(hash == config_hash(rc));
  CHECK(back.time == psi.time);
  CHECK(back.x_min == psi.x_min);
  CHECK(back.dx == psi.dx);
  CHECK(back.samples == psi.samples);
  std::filesystem::remove(path);
}
