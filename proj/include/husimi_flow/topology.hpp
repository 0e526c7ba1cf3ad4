#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string_view>
#include <vector>

#include "husimi_flow/current.hpp"
#include "husimi_flow/husimi.hpp"

namespace husimi_flow {

using complex = std::complex<double>;
using VectorSampler = std::function<complex(complex)>;

/// Vector gradient of J at a point:
///   [[dJ/dz, dJ/d(conj z)], [d(conj J)/dz, d(conj J)/d(conj z)]].
/// The bottom row is the conjugate of the top row with the entries swapped,
/// so two numbers determine the matrix; trace and determinant are real.
struct GradientMatrix {
  complex dj_dz;
  complex dj_dzbar;

  std::array<std::array<complex, 2>, 2> matrix() const {
    return {{{dj_dz, dj_dzbar}, {std::conj(dj_dzbar), std::conj(dj_dz)}}};
  }
  double trace() const { return 2.0 * dj_dz.real(); }
  double determinant() const { return std::norm(dj_dz) - std::norm(dj_dzbar); }
  double norm() const { return std::sqrt(2.0 * (std::norm(dj_dz) + std::norm(dj_dzbar))); }
};

/// Richardson-extrapolated central differences along Re z and Im z. The step
/// starts at `step` and shrinks until two extrapolation levels agree to 1e-6;
/// throws ConvergenceError if they never do.
GradientMatrix gradient_matrix(const VectorSampler& field, complex z0, double step = 1e-3);

enum class FlowClass { saddle, attractive_node, repulsive_node, attractive_spiral, repulsive_spiral, vortex, degenerate };

std::string_view to_string(FlowClass c);

struct Classification {
  FlowClass kind = FlowClass::degenerate;
  complex lambda_plus;
  complex lambda_minus;
  /// Index implied by the eigenvalues: -1 for saddles, +1 otherwise, 0 if degenerate.
  int predicted_index = 0;
};

/// Eigenvalue classification. Real/imaginary discrimination and the
/// degeneracy test |lambda+ - lambda-| use `threshold` * ||G||.
Classification classify(const GradientMatrix& g, double threshold = 1e-8);

/// Poincare index of J around a circle of `radius` about z0, traversed
/// clockwise: (1/2pi) times the accumulated clockwise rotation of J, so a
/// counterclockwise turn of J adds -1 (saddle -1, vortex +1). Sample gaps with
/// an angle jump above pi/4 are bisected. If |J| drops below relative_floor
/// times its loop maximum the radius is halved up to `retries` times before
/// ConvergenceError.
int winding_index(const VectorSampler& field, complex z0, double radius, int n_samples = 64,
                  double relative_floor = 1e-8, int retries = 2);

/// Same accounting on an arbitrary closed polygon given in clockwise order.
int winding_along(const VectorSampler& field, const std::vector<complex>& clockwise_polygon, double floor);

enum class StagnationKind { trivial, nontrivial };

std::string_view to_string(StagnationKind k);

struct StagnationPoint {
  int id = 0;
  complex z;
  double x = 0.0;
  double p = 0.0;
  StagnationKind kind = StagnationKind::trivial;
  GradientMatrix gradient;
  Classification classification;
  /// Winding integral result; independent of the eigenvalue classification.
  int index = 0;
  double loop_radius = 0.0;
  /// |J| at the point relative to the window maximum.
  double residual = 0.0;
  /// Neighbourhood maximum of Q relative to the window maximum.
  double local_q = 0.0;
  /// Trivial points inherit the zero's stability; non-trivial ones are stable.
  bool stable = true;
  /// Eigenvalue-predicted index disagrees with the winding integral, or a
  /// trivial point is not a saddle.
  bool anomaly = false;
  int partner = -1;
};

struct StagnationOptions {
  /// Grid seeds need node Q above mask * max Q; refined points need the
  /// neighbourhood maximum of Q (same measure as zero significance) above it.
  double mask = 1e-12;
  int neighbourhood = 3;
  double degeneracy = 1e-8;
  double loop_cells = 2.0;
  int loop_samples = 64;
  int shrink_retries = 2;
  /// |J| floor on winding loops relative to the loop maximum of |J|.
  double current_floor = 1e-8;
  int max_iterations = 50;
  /// Newton acceptance for f = 0: below tolerance times the window maximum
  /// of |f|, or a settled iterate below tolerance times |f| at the seed.
  double tolerance = 1e-9;
};

struct StagnationReport {
  std::vector<StagnationPoint> points;
  /// Non-trivial Newton candidates that did not converge inside the window.
  std::vector<complex> rejected_candidates;
  int anomalies = 0;
};

/// Trivial points come from the significant Husimi zeros; non-trivial ones are
/// zeros of the reduced factor f seeded from local minima of |f| on unmasked
/// nodes and refined by 2D Newton. Every point is classified and its winding
/// index computed. Output is sorted by position.
StagnationReport find_stagnation_points(const CurrentField& current, const HusimiField& husimi,
                                        const CurrentSampler& sampler, const ZeroSearchResult& zeros,
                                        const StagnationOptions& opts = {});

struct Dipole {
  int saddle = -1;
  int partner = -1;
  double separation = 0.0;
};

struct DipolePairing {
  std::vector<Dipole> dipoles;
  std::vector<int> unpaired;
};

/// Greedy nearest-neighbour matching of index -1 to index +1 points within
/// max_sep (|dz|; 1 is the coherent-state width). Sets `partner` on matched
/// points.
DipolePairing pair_dipoles(std::vector<StagnationPoint>& points, double max_sep = 1.0);

/// Clockwise polygon approximating a circle.
std::vector<complex> circle_loop(complex center, double radius, int n_samples);

/// Clockwise rectangle with corners lo and hi (z units), n_per_side vertices per side.
std::vector<complex> rectangle_loop(complex lo, complex hi, int n_per_side = 64);

bool inside_polygon(const std::vector<complex>& polygon, complex z);

/// Sum of winding indices of the points inside the polygon.
int enclosed_index(const std::vector<StagnationPoint>& points, const std::vector<complex>& polygon);

}  // namespace husimi_flow
