#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "husimi_flow/classical.hpp"
#include "husimi_flow/coherent.hpp"
#include "husimi_flow/errors.hpp"
#include "husimi_flow/husimi.hpp"
#include "husimi_flow/propagator.hpp"
#include "oracles.hpp"

using namespace husimi_flow;

namespace {

// Weight of the initial Husimi density with p^2/2m + V(x) > V0 and p > 0, by
// plain 2D midpoint quadrature.
double energy_weight(double x0, double p0, const PhaseSpaceConfig& cfg) {
  const double wx = std::sqrt(2.0) * cfg.sigma_x(), wp = std::sqrt(2.0) * cfg.sigma_p();
  const int n = 400;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ux = -6.0 + 12.0 * (i + 0.5) / n;
    const double x = x0 + wx * ux;
    const double v = cfg.v0 * std::exp(-cfg.k * x * x);
    const double gap = cfg.v0 - v;
    const double p_min = std::sqrt(2.0 * cfg.mass * std::max(gap, 0.0));
    const double above = 1.0 - oracle::normal_cdf((p_min - p0) / wp);
    s += std::exp(-0.5 * ux * ux) / std::sqrt(2.0 * std::numbers::pi) * (12.0 / n) * above;
  }
  return s;
}

}  // namespace

TEST_CASE("Hamilton's equations") {
  const PhaseSpaceConfig cfg;
  const auto v = hamilton_rhs(0.5, 1.2, cfg);
  CHECK(v.dx == doctest::Approx(1.2));
  // dp/dt = -V'(x) = 2 k V0 x exp(-k x^2)
  CHECK(v.dp == doctest::Approx(2.0 * 3.0 * 2.0 * 0.5 * std::exp(-0.75)).epsilon(1e-14));
  CHECK(hamilton_rhs(0.0, 0.3, cfg).dp == 0.0);
  PhaseSpaceConfig h = cfg;
  h.potential = PotentialKind::harmonic;
  CHECK(hamilton_rhs(0.7, 0.0, h).dp == doctest::Approx(-0.7));
  CHECK(classical_energy(0.0, 1.0, cfg) == doctest::Approx(2.5));
}

TEST_CASE("single orbits") {
  const PhaseSpaceConfig cfg;
  const Trajectory over = integrate(-4.0, 2.2, 5.0, 0.0025, cfg, 100);
  CHECK(over.final().x > 2.0);
  CHECK(over.final().p > 0.0);
  CHECK(over.max_drift < kEnergyDriftLimit);
  CHECK(over.samples.front().t == 0.0);
  CHECK(over.final().t == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(over.samples.size() > 2);

  const Trajectory back = integrate(-4.0, 1.8, 5.0, 0.0025, cfg);
  CHECK(back.final().x < -1.0);
  CHECK(back.final().p == doctest::Approx(-1.8).epsilon(1e-6));
  CHECK(back.samples.size() == 2);

  // energy exactly V0 creeps towards the barrier top
  const double p_sep = std::sqrt(2.0 * (cfg.v0 - cfg.potential_energy(-4.0)));
  const auto sep = flow(-4.0, p_sep * (1.0 - 1e-12), 5.0, 0.0025, cfg);
  CHECK(sep.x < 0.0);
  CHECK(sep.x > -0.3);
  CHECK(sep.p > 0.0);
  CHECK(sep.p < 0.6);

  const auto there = flow(-1.0, 0.4, 1.3, 0.0025, cfg);
  const auto home = flow(there.x, there.p, -1.3, 0.0025, cfg);
  CHECK(home.x == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(home.p == doctest::Approx(0.4).epsilon(1e-10));

  CHECK_THROWS_AS(integrate(-0.3, 2.0, 3.0, 0.4, cfg), EnergyDriftError);
}

TEST_CASE("classical transmission") {
  PhaseSpaceConfig free;
  free.v0 = 0.0;
  CHECK(classical_transmission(-4.0, 1.8, free, 6.0).transmission == doctest::Approx(1.0).epsilon(1e-9));

  const PhaseSpaceConfig cfg;
  const auto at_top = classical_transmission(-4.0, 2.0, cfg, 8.0);
  CHECK(at_top.transmission == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(at_top.transmission == doctest::Approx(energy_weight(-4.0, 2.0, cfg)).epsilon(2e-3));
  CHECK(at_top.transmission + at_top.reflection == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at_top.convergence_gap < 1e-3);

  const auto below = classical_transmission(-4.0, 1.8, cfg, 8.0);
  CHECK(below.transmission > 0.0);
  CHECK(below.transmission < 1.0);
  CHECK(below.transmission == doctest::Approx(energy_weight(-4.0, 1.8, cfg)).epsilon(2e-2));
  CHECK(below.energy_transmission == doctest::Approx(energy_weight(-4.0, 1.8, cfg)).epsilon(1e-3));

  TransmissionOptions quick;
  quick.check_convergence = false;
  double last = -1.0;
  for (const double p0 : {1.6, 1.9, 2.1, 2.4}) {
    const double t = classical_transmission(-4.0, p0, cfg, 8.0, quick).transmission;
    CHECK(t >= last);
    last = t;
  }

  TransmissionOptions strict;
  strict.n_samples = 2;
  strict.convergence = 1e-12;
  CHECK_THROWS_AS(classical_transmission(-0.6, 1.0, cfg, 3.0, strict), ConvergenceError);
}

TEST_CASE("Liouville transport of the Husimi density") {
  PhaseSpaceConfig cfg = desk_preset().physics;
  cfg.potential = PotentialKind::harmonic;
  cfg.dt = 2.0 * std::numbers::pi / 628.0;
  const auto psi = initial_coherent_state(0.2, 0.0, cfg);
  const PhaseSpaceWindow w{-0.5, 0.5, -0.5, 0.5, 41, 41};
  const HusimiField initial = husimi_field(psi, w, cfg, 0);

  const DensityField same = classical_pullback_field(initial, 0.0, w, cfg);
  for (std::size_t i = 0; i < same.q.size(); ++i) CHECK(same.q[i] == doctest::Approx(initial.q[i]).epsilon(1e-12));

  // a quarter turn carries (0.2, 0) to (0, -0.2)
  const double t = 0.5 * std::numbers::pi;
  const DensityField moved = classical_pullback_field(initial, t, w, cfg);
  const auto peak = std::max_element(moved.q.begin(), moved.q.end()) - moved.q.begin();
  CHECK(w.x_at(static_cast<int>(peak % 41)) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(w.p_at(static_cast<int>(peak / 41)) == doctest::Approx(-0.2).epsilon(1e-9));
  CHECK(moved.max() == doctest::Approx(initial.max_q()).epsilon(1e-6));
  CHECK(moved.normalization(cfg) == doctest::Approx(to_density(initial).normalization(cfg)).epsilon(1e-6));

  const auto later = evolve(psi, t, {}, cfg);
  const HusimiField quantum = husimi_field(later.back(), w, cfg, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < moved.q.size(); ++i) worst = std::max(worst, std::abs(moved.q[i] - quantum.q[i]));
  CHECK(worst < 1e-4 * quantum.max_q());
}

TEST_CASE("trajectory export") {
  const PhaseSpaceConfig cfg;
  const std::vector<Trajectory> bundle = {integrate(-4.0, 2.2, 1.0, 0.01, cfg, 10), integrate(-4.0, 1.0, 1.0, 0.01, cfg, 50)};
  const auto path = std::filesystem::temp_directory_path() / "hf_traj_test.txt";
  write_trajectories(bundle, "00ff00ff00ff00ff", path);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# config_hash = 00ff00ff00ff00ff");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  CHECK(rows == bundle[0].samples.size() + bundle[1].samples.size());
  std::filesystem::remove(path);
}
