#pragma once

#include <complex>
#include <vector>

#include "statper/errors.hpp"
#include "statper/types.hpp"

namespace statper {

// Parameter pair for the two-branch planar family: beta is the tent slope,
// alpha the linear feedback gain. beta is restricted to (1, 2] so the tent
// core stays invariant.
struct MapParams {
  double alpha;
  double beta;

  MapParams(double alpha_, double beta_);

  // Left/right fixed points of the switched form exist on these parameter sets.
  bool has_left_fixed() const { return alpha + beta > 1.0; }
  bool has_right_fixed() const { return alpha - beta < 1.0; }
  // Right-branch eigenvalue pair is a complex conjugate pair.
  bool complex_right_pair() const { return alpha * alpha < 4.0 * beta; }
};

// Tent map on the real line with peak value beta+1 at x = 0.
double tent(double x, const MapParams& p);

// Classic tent on [0,1] with slope in (1,2].
double hat_map(double x, double slope);

// Delay form: (x, y) -> (y, alpha*y + tent(x)).
Point2 delay_map(Point2 v, const MapParams& p);

// Switched form: (x, y) -> (alpha*x + y + 1, beta*x) for x < 0,
// (alpha*x + y + 1, -beta*x) for x >= 0.  x = 0 belongs to the right branch.
Point2 switched_map(Point2 v, const MapParams& p);

// Coordinate change taking delay-chart points to switched-chart points.
// Satisfies switched_map(to_switched_coords(v)) == to_switched_coords(delay_map(v)).
Point2 to_switched_coords(Point2 v, const MapParams& p);

// Scalar recurrence step x_next = alpha*x_curr + tent(x_prev).
double delay_step(double x_prev, double x_curr, const MapParams& p);

// Negative control on [0,1)^2: (x, y) -> (4x mod 1, y/2).
// Expands area in x faster than it contracts in y yet admits no absolutely
// continuous invariant density (mass piles up on the y = 0 line).
Point2 anisotropic_mod_map(Point2 v);

enum class BranchId { Left, Right };

// One affine branch with a half-open strip domain [x_lo, x_hi).
struct Branch {
  BranchId id;
  double x_lo;
  double x_hi;
  Affine2 forward;
  Affine2 inverse;

  bool contains(double x) const { return x >= x_lo && x < x_hi; }
};

// Piecewise-affine planar map assembled from branch strips.
struct PiecewiseMap2D {
  std::vector<Branch> branches;

  Point2 operator()(Point2 v) const;
  const Branch& branch_at(double x) const;
};

PiecewiseMap2D make_switched_map(const MapParams& p);
PiecewiseMap2D make_delay_map(const MapParams& p);
PiecewiseMap2D make_anisotropic_mod_map();

enum class Stability {
  Saddle,
  UnstableNode,
  UnstableFocus,
  Center,
  StableFocus,
  Degenerate,
};

struct FixedPointReport {
  BranchId side;
  Point2 location;
  std::complex<double> eig_plus;   // larger real part first
  std::complex<double> eig_minus;
  Stability stability;
};

// Classify a 2x2 eigenvalue pair. Complex pairs are labeled by the sign of
// the shared real part (rotation convention); real pairs by their moduli
// relative to 1. Pairs sitting on a boundary come back Degenerate.
Stability classify_stability(std::complex<double> e1, std::complex<double> e2);

// Fixed points of the switched form that exist at p, left one first.
// Boundary parameter sets (alpha+beta == 1, alpha-beta == 1) report no point
// for the affected side.
std::vector<FixedPointReport> fixed_points(const MapParams& p);

// Inverse of the right branch of the switched form as an affine map:
// matrix [[0, -1/beta], [1, alpha/beta]], offset (0, -1).
Affine2 right_branch_inverse(const MapParams& p);

// n-th power of the right-branch inverse matrix, evaluated with a real
// two-term recurrence on its trace and determinant. Requires the complex
// eigenvalue regime alpha^2 < 4*beta.
Mat2 right_inverse_power(int n, const MapParams& p);

// Geometric sum I + A + ... + A^(n-1) of the right-branch inverse matrix,
// same recurrence, same regime requirement. n = 0 gives the zero matrix.
Mat2 right_inverse_geometric_sum(int n, const MapParams& p);

}  // namespace statper
