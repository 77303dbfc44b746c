#pragma once

#include <cstdint>
#include <vector>

#include "statper/maps.hpp"

namespace statper {

// Open half-plane below the line through the left fixed point with slope
// beta / eig_minus, clipped to the closed left lower quadrant strip
// {x <= 0, y < 0}. Orbits started here run off along the unstable direction.
struct EscapeWedge {
  Point2 anchor;
  double slope;

  bool contains(Point2 v) const {
    return v.x <= 0.0 && v.y < 0.0 && (v.y - anchor.y) < slope * (v.x - anchor.x);
  }
};

// Canonical escape wedge for p; requires the left fixed point.
EscapeWedge escape_wedge(const MapParams& p);

// Boundary value on the switching line: the wedge border crosses x = 0 at
// (0, c) with c = beta * xL * (1 - 1/eig_minus). Requires alpha + beta > 1.
double escape_intercept(const MapParams& p);

// Backward orbit of (0, c) under the right-branch inverse, evaluated with the
// closed-form matrix powers. depth is the first index whose point has
// strictly positive y; points on the axis count as not yet positive.
struct PreimageChain {
  double intercept;            // c
  int depth;                   // first index with positive y
  std::vector<Point2> points;  // indices 0..depth, points[0] = (0, c)
};

PreimageChain preimage_chain(const MapParams& p, int max_iter = 64);

// x-axis crossings used to decide whether the candidate region is conserved:
// chord through the last two chain points, and chord through the last chain
// point and the right fixed point.
struct AxisIntercepts {
  double chord;
  double focus;
};

AxisIntercepts axis_intercepts(const PreimageChain& chain, const MapParams& p);

// a: both crossings left of 1 (the region leaks). b: focus crossing left of
// 1, chord crossing at or right of 1 (conserved). c: both right of 1
// (conserved). The chord crossing never sits left of the focus crossing for
// spiral chains; that combination is reported as degenerate geometry.
enum class RegionCase { A, B, C };

RegionCase classify_case(double chord, double focus);

struct RegionDecomposition {
  double intercept;
  int depth;
  std::vector<Point2> chain;
  double chord_intercept;
  double focus_intercept;
  RegionCase label;
  Point2 left_fixed;
  Point2 right_fixed;
  EscapeWedge wedge;
};

RegionDecomposition decompose_regions(const MapParams& p);

// v lies in the wedge or one of its depth right-branch preimages, all
// clipped to y <= 0. Membership of the i-th preimage is decided by pushing
// v forward i times through the right branch.
bool in_divergence_set(const RegionDecomposition& d, const MapParams& p, Point2 v);

// Lower half-plane minus the divergence set.
bool in_candidate_region(const RegionDecomposition& d, const MapParams& p, Point2 v);

// Upper edge of the conserved window that begins at alpha = 0: the first
// alpha at which the chord crossing drops left of 1, located by an upward
// scan followed by bisection. Narrow conserved islands above that edge are
// not part of the window and are ignored. The chain depth is re-derived at
// every evaluation; depth reports the value on the conserved side of the
// threshold. If the window is empty the result is alpha_star = 0 with the
// depth observed near alpha = 0.
struct ThresholdResult {
  double alpha_star;
  int depth;
};

ThresholdResult alpha_threshold(double beta, double tol = 1e-7);

// Monte Carlo check of the conservation claim: sample the candidate region,
// iterate the switched map, report the fraction still inside; sample the
// wedge, report the fraction that blew past the escape radius.
struct TrappingProbeResult {
  double fraction_remaining;
  double wedge_escape_fraction;
  long region_samples;
  long wedge_samples;
};

TrappingProbeResult trapping_region_probe(const MapParams& p, int steps = 200,
                                          long n_points = 20000, std::uint64_t seed = 1);

}  // namespace statper
