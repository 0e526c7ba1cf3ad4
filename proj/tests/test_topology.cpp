#include <doctest.h>

#include <cmath>

#include "husimi_flow/errors.hpp"
#include "husimi_flow/experiment.hpp"
#include "husimi_flow/propagator.hpp"
#include "husimi_flow/topology.hpp"

using namespace husimi_flow;

namespace {

StagnationPoint point_at(complex z, int index) {
  StagnationPoint s;
  s.z = z;
  s.index = index;
  return s;
}

}  // namespace

TEST_CASE("linear saddle and vortex") {
  const VectorSampler saddle = [](complex z) { return std::conj(z); };
  const VectorSampler vortex = [](complex z) { return complex(0.0, -1.0) * z; };
  const GradientMatrix gs = gradient_matrix(saddle, 0.0);
  CHECK(std::abs(gs.dj_dz) < 1e-10);
  CHECK(std::abs(gs.dj_dzbar - 1.0) < 1e-10);
  CHECK(gs.determinant() == doctest::Approx(-1.0).epsilon(1e-10));
  const auto cs = classify(gs);
  CHECK(cs.kind == FlowClass::saddle);
  CHECK(cs.predicted_index == -1);
  CHECK(winding_index(saddle, 0.0, 0.5) == -1);

  const GradientMatrix gv = gradient_matrix(vortex, 0.0);
  CHECK(gv.trace() == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(gv.determinant() == doctest::Approx(1.0).epsilon(1e-10));
  const auto cv = classify(gv);
  CHECK(cv.kind == FlowClass::vortex);
  CHECK(cv.predicted_index == 1);
  CHECK(winding_index(vortex, 0.0, 0.5) == 1);
  const auto m = gv.matrix();
  CHECK(std::abs(m[1][1] - std::conj(m[0][0])) < 1e-15);
}

TEST_CASE("nodes, spirals and degenerate gradients") {
  const auto kind_of = [](const VectorSampler& f) { return classify(gradient_matrix(f, complex(0.2, -0.1))).kind; };
  CHECK(kind_of([](complex z) { return -z - 0.5 * std::conj(z); }) == FlowClass::attractive_node);
  CHECK(kind_of([](complex z) { return z + 0.5 * std::conj(z); }) == FlowClass::repulsive_node);
  CHECK(kind_of([](complex z) { return complex(-0.1, -1.0) * z; }) == FlowClass::attractive_spiral);
  CHECK(kind_of([](complex z) { return complex(0.1, -1.0) * z; }) == FlowClass::repulsive_spiral);
  CHECK(kind_of([](complex z) { return z + std::conj(z); }) == FlowClass::degenerate);
  CHECK(classify(GradientMatrix{}).predicted_index == 0);
  for (const FlowClass c : {FlowClass::saddle, FlowClass::vortex, FlowClass::degenerate}) CHECK(!to_string(c).empty());

  // eigenvalues of the 2x2 matrix satisfy the characteristic polynomial
  const GradientMatrix g{complex(0.3, 0.7), complex(-0.2, 0.4)};
  const auto c = classify(g);
  for (const complex l : {c.lambda_plus, c.lambda_minus}) {
    CHECK(std::abs(l * l - g.trace() * l + g.determinant()) < 1e-12);
  }
}

TEST_CASE("winding loop shrinks past a zero on the circle and fails on a null field") {
  const VectorSampler f = [](complex z) { return std::conj(z) * (z - 0.4); };
  CHECK(winding_index(f, 0.0, 0.4) == -1);
  CHECK(winding_index(f, 0.0, 0.6) == 0);
  const VectorSampler null = [](complex) { return complex{}; };
  CHECK_THROWS_AS(winding_index(null, 0.0, 0.5), ConvergenceError);
  CHECK_THROWS_AS(gradient_matrix([](complex z) { return std::abs(z.real()) < 1e-30 ? 1.0 : 1.0 / z.real(); }, 0.0),
                  ConvergenceError);
}

TEST_CASE("dipole pairing") {
  std::vector<StagnationPoint> none;
  const auto empty = pair_dipoles(none);
  CHECK(empty.dipoles.empty());
  CHECK(empty.unpaired.empty());

  std::vector<StagnationPoint> pts = {point_at(0.0, -1), point_at(0.1, 1), point_at(5.0, 1), point_at(complex(0, 3), -1)};
  const auto pairing = pair_dipoles(pts);
  REQUIRE(pairing.dipoles.size() == 1);
  CHECK(pairing.dipoles[0].saddle == 0);
  CHECK(pairing.dipoles[0].partner == 1);
  CHECK(pairing.dipoles[0].separation == doctest::Approx(0.1));
  CHECK(pts[0].partner == 1);
  CHECK(pts[1].partner == 0);
  CHECK(pairing.unpaired.size() == 2);
  int total = 0;
  for (const auto& p : pts) total += p.index;
  int paired = 0;
  for (const auto& d : pairing.dipoles) paired += pts[static_cast<std::size_t>(d.saddle)].index + pts[static_cast<std::size_t>(d.partner)].index;
  CHECK(paired == 0);
  int rest = 0;
  for (const int i : pairing.unpaired) rest += pts[static_cast<std::size_t>(i)].index;
  CHECK(rest == total);
}

TEST_CASE("loops and enclosed index") {
  const complex a(-0.5, 0.0), b(0.5, 0.2);
  const VectorSampler f = [&](complex z) { return std::conj(z - a) * (z - b); };
  const std::vector<StagnationPoint> pts = {point_at(a, -1), point_at(b, 1)};
  const auto both = rectangle_loop(complex(-1, -1), complex(1, 1));
  const auto left = rectangle_loop(complex(-1, -1), complex(0, 1));
  const auto right = rectangle_loop(complex(0, -1), complex(1, 1));
  CHECK(winding_along(f, both, 1e-12) == 0);
  CHECK(enclosed_index(pts, both) == 0);
  CHECK(winding_along(f, left, 1e-12) == -1);
  CHECK(enclosed_index(pts, left) == -1);
  CHECK(winding_along(f, right, 1e-12) == 1);
  CHECK(enclosed_index(pts, right) == 1);
  CHECK(inside_polygon(circle_loop(0.0, 1.0, 32), complex(0.3, 0.3)));
  CHECK_FALSE(inside_polygon(circle_loop(0.0, 1.0, 32), complex(0.9, 0.9)));
  // clockwise orientation: signed area is negative
  double area = 0.0;
  for (std::size_t i = 0; i < both.size(); ++i) {
    const complex p = both[i], q = both[(i + 1) % both.size()];
    area += p.real() * q.imag() - q.real() * p.imag();
  }
  CHECK(area < 0.0);
}

TEST_CASE("harmonic coherent state has one vortex") {
  RunConfig rc = desk_preset();
  rc.physics.potential = PotentialKind::harmonic;
  rc.x0 = 0.05;
  rc.p0 = 0.04;
  rc.window = {-0.3, 0.3, -0.3, 0.3, 40, 40};
  SnapshotOptions opts;
  opts.reproducibility = false;
  opts.energy_levels.clear();
  const auto snaps = run_snapshot_pipeline(rc, {0.0}, opts);
  REQUIRE(snaps.size() == 1);
  const auto& pts = snaps[0].stagnation.points;
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].kind == StagnationKind::nontrivial);
  CHECK(pts[0].classification.kind == FlowClass::vortex);
  CHECK(pts[0].index == 1);
  CHECK(std::abs(pts[0].z) < 1e-8);
  CHECK(snaps[0].dipoles.unpaired.size() == 1);
}

TEST_CASE("stagnation points of the scattered packet") {
  RunConfig rc = desk_preset();
  rc.physics.trunc_order = 10;
  SnapshotOptions opts;
  opts.reproducibility = false;
  const double t = 2.1, delta = 1e-4;
  const auto snaps = run_snapshot_pipeline(rc, {t}, opts);
  const Snapshot& s = snaps[0];
  const auto& pts = s.stagnation.points;
  CHECK(pts.size() >= 8);
  CHECK(s.stagnation.anomalies == 0);

  // dQ/dt from states a short time either side
  SplitOperatorPropagator prop(rc.physics);
  WavefunctionGrid before = s.husimi.sampler->wavefunction(), after = before;
  prop.advance(after, delta);
  prop.advance(before, -delta);
  const HusimiSampler qb(before, rc.physics), qa(after, rc.physics);
  int trivial = 0, checked = 0;
  for (const auto& p : pts) {
    CHECK(p.index == p.classification.predicted_index);
    if (p.kind == StagnationKind::trivial) {
      ++trivial;
      CHECK(p.classification.kind == FlowClass::saddle);
      CHECK(p.index == -1);
      CHECK(std::abs(p.gradient.trace()) <= 1e-6 * p.gradient.norm());
      continue;
    }
    if (p.local_q < 1e-6) continue;
    ++checked;
    const double dq_dt = (qa.density(p.z) - qb.density(p.z)) / (2.0 * delta);
    CHECK(std::abs(p.gradient.trace() + dq_dt) <= 1e-4 * std::abs(dq_dt));
  }
  CHECK(trivial >= 3);
  CHECK(checked >= 1);
}
