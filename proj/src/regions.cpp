#include "statper/regions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace statper {

namespace {

FixedPointReport left_fixed_or_throw(const MapParams& p, const char* op) {
  if (!p.has_left_fixed()) {
    throw InvalidArgument(std::string(op) + ": needs alpha + beta > 1 (left fixed point)");
  }
  return fixed_points(p).front();
}

FixedPointReport right_fixed_or_throw(const MapParams& p, const char* op) {
  if (!p.has_right_fixed()) {
    throw InvalidArgument(std::string(op) + ": needs alpha - beta < 1 (right fixed point)");
  }
  return fixed_points(p).back();
}

double x_intercept(Point2 a, Point2 b, const char* what) {
  double dy = b.y - a.y;
  if (std::fabs(dy) < 1e-14) {
    throw NumericalError(std::string("axis_intercepts: degenerate ") + what + " chord");
  }
  return a.x - a.y * (b.x - a.x) / dy;
}

}  // namespace

EscapeWedge escape_wedge(const MapParams& p) {
  FixedPointReport L = left_fixed_or_throw(p, "escape_wedge");
  return {L.location, p.beta / L.eig_minus.real()};
}

double escape_intercept(const MapParams& p) {
  FixedPointReport L = left_fixed_or_throw(p, "escape_intercept");
  return p.beta * L.location.x * (1.0 - 1.0 / L.eig_minus.real());
}

PreimageChain preimage_chain(const MapParams& p, int max_iter) {
  double c = escape_intercept(p);
  Point2 b{0.0, -1.0};
  PreimageChain chain;
  chain.intercept = c;
  chain.points.push_back({0.0, c});
  for (int i = 1; i <= max_iter; ++i) {
    // Closed form for the i-fold inverse: A^i v + (I + A + ... + A^(i-1)) b.
    Mat2 pow = right_inverse_power(i, p);
    Mat2 gsum = right_inverse_geometric_sum(i, p);
    Point2 v = pow * Point2{0.0, c};
    Point2 w = gsum * b;
    Point2 q{v.x + w.x, v.y + w.y};
    chain.points.push_back(q);
    if (q.y > 0.0) {
      chain.depth = i;
      return chain;
    }
  }
  throw NumericalError("preimage_chain: no positive-y preimage within max_iter = " +
                       std::to_string(max_iter) +
                       " (parameter regime may sit outside the conserved-window construction)");
}

AxisIntercepts axis_intercepts(const PreimageChain& chain, const MapParams& p) {
  if (chain.depth < 1 || chain.points.size() < 2) {
    throw InvalidArgument("axis_intercepts: chain must reach depth >= 1");
  }
  FixedPointReport R = right_fixed_or_throw(p, "axis_intercepts");
  Point2 last = chain.points[chain.depth];
  Point2 prev = chain.points[chain.depth - 1];
  AxisIntercepts out;
  out.chord = x_intercept(last, prev, "chain");
  out.focus = x_intercept(last, R.location, "focus");
  return out;
}

RegionCase classify_case(double chord, double focus) {
  if (chord < 1.0 && focus < 1.0) return RegionCase::A;
  if (chord >= 1.0 && focus <= 1.0) return RegionCase::B;
  if (chord > 1.0 && focus > 1.0) return RegionCase::C;
  throw NumericalError("classify_case: focus crossing right of the chord crossing");
}

RegionDecomposition decompose_regions(const MapParams& p) {
  PreimageChain chain = preimage_chain(p);
  AxisIntercepts xs = axis_intercepts(chain, p);
  RegionDecomposition d;
  d.intercept = chain.intercept;
  d.depth = chain.depth;
  d.chain = chain.points;
  d.chord_intercept = xs.chord;
  d.focus_intercept = xs.focus;
  d.label = classify_case(xs.chord, xs.focus);
  d.left_fixed = fixed_points(p).front().location;
  d.right_fixed = right_fixed_or_throw(p, "decompose_regions").location;
  d.wedge = escape_wedge(p);
  return d;
}

bool in_divergence_set(const RegionDecomposition& d, const MapParams& p, Point2 v) {
  if (v.y > 0.0) return false;
  if (d.wedge.contains(v)) return true;
  // i-th preimage of the wedge: push v forward through the right branch.
  Affine2 fwd = make_switched_map(p).branches[1].forward;
  Point2 w = v;
  for (int i = 1; i <= d.depth; ++i) {
    w = fwd(w);
    if (d.wedge.contains(w)) return true;
  }
  return false;
}

bool in_candidate_region(const RegionDecomposition& d, const MapParams& p, Point2 v) {
  return v.y <= 0.0 && !in_divergence_set(d, p, v);
}

ThresholdResult alpha_threshold(double beta, double tol) {
  if (!(beta > 1.0 && beta <= 2.0)) {
    throw InvalidArgument("alpha_threshold: beta must lie in (1, 2]");
  }
  if (!(tol > 0.0)) throw InvalidArgument("alpha_threshold: tol must be positive");

  auto chord_gap = [beta](double alpha, int* depth_out) {
    try {
      MapParams p(alpha, beta);
      PreimageChain chain = preimage_chain(p);
      if (depth_out) *depth_out = chain.depth;
      return axis_intercepts(chain, p).chord - 1.0;
    } catch (const NumericalError&) {
      // Slow-rotation regimes never lift the chain above the axis; no
      // conserved region exists there, so score them as "not conserved".
      return -1.0;
    }
  };

  // Upward scan from the bottom of the window. The first sign change is the
  // window's upper edge; detached conserved islands further up are ignored.
  const double alpha_cap = 2.0 * std::sqrt(beta) - 1e-6;
  const double step = 1e-3;
  int depth_lo = 0;
  double prev = chord_gap(step, &depth_lo);
  if (prev < 0.0) return {0.0, depth_lo};

  double lo = step, hi = -1.0;
  for (double a = 2.0 * step; a < alpha_cap; a += step) {
    double g = chord_gap(a, nullptr);
    if (g < 0.0) {
      lo = a - step;
      hi = a;
      break;
    }
    prev = g;
  }
  if (hi < 0.0) {
    throw NumericalError(
        "alpha_threshold: chord crossing never drops left of 1 below the regime boundary "
        "(last gap = " + std::to_string(prev) + " near alpha = " + std::to_string(alpha_cap) + ")");
  }

  chord_gap(lo, &depth_lo);
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    int depth_mid = 0;
    if (chord_gap(mid, &depth_mid) >= 0.0) {
      lo = mid;
      depth_lo = depth_mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), depth_lo};
}

TrappingProbeResult trapping_region_probe(const MapParams& p, int steps, long n_points,
                                          std::uint64_t seed) {
  RegionDecomposition d = decompose_regions(p);

  double xmin = d.left_fixed.x, xmax = d.right_fixed.x;
  double ymin = std::min(d.intercept, d.left_fixed.y);
  for (const Point2& q : d.chain) {
    xmin = std::min(xmin, q.x);
    xmax = std::max(xmax, q.x);
    ymin = std::min(ymin, q.y);
  }
  xmin -= 1.0;
  xmax += 1.0;
  ymin -= 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(xmin, xmax);
  std::uniform_real_distribution<double> uy(ymin, 0.0);

  long kept = 0, stayed = 0;
  long wedge_total = 0, wedge_escaped = 0;
  const double blowup = 1e9;
  const double escape_radius = 100.0;

  long attempts = 0, target = n_points;
  while (kept < target && attempts < 50 * target) {
    ++attempts;
    Point2 v{ux(rng), uy(rng)};
    if (!in_candidate_region(d, p, v)) continue;
    ++kept;
    Point2 w = v;
    bool blown = false;
    for (int s = 0; s < steps; ++s) {
      w = switched_map(w, p);
      if (std::fabs(w.x) > blowup || std::fabs(w.y) > blowup) {
        blown = true;
        break;
      }
    }
    if (!blown && in_candidate_region(d, p, w)) ++stayed;
  }
  if (kept == 0) throw NumericalError("trapping_region_probe: no region samples found");

  attempts = 0;
  while (wedge_total < target && attempts < 200 * target) {
    ++attempts;
    Point2 v{ux(rng), uy(rng)};
    if (!d.wedge.contains(v)) continue;
    ++wedge_total;
    Point2 w = v;
    bool escaped = false;
    for (int s = 0; s < steps; ++s) {
      w = switched_map(w, p);
      if (std::fabs(w.x) > escape_radius || std::fabs(w.y) > escape_radius) {
        escaped = true;
        break;
      }
    }
    if (escaped) ++wedge_escaped;
  }
  if (wedge_total == 0) throw NumericalError("trapping_region_probe: no wedge samples found");

  TrappingProbeResult r;
  r.fraction_remaining = double(stayed) / double(kept);
  r.wedge_escape_fraction = double(wedge_escaped) / double(wedge_total);
  r.region_samples = kept;
  r.wedge_samples = wedge_total;
  return r;
}

}  // namespace statper
