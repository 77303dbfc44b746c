#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "statper/errors.hpp"
#include "statper/maps.hpp"
#include "statper/transfer.hpp"
#include "statper/types.hpp"

namespace statper {

// Continuous and piecewise C^1 curve on [0,1]. A polyline stores its
// vertices and spends equal parameter time on every segment; anything
// else is wrapped as a raw parameter map and only works with the sampled
// code paths.
struct Curve {
  std::vector<Point2> vertices;
  std::function<Point2(double)> param;

  static Curve polyline(std::vector<Point2> pts);
  static Curve parametric(std::function<Point2(double)> f);

  bool is_polyline() const { return vertices.size() >= 2; }
  int segment_count() const;
  Point2 at(double t) const;
};

// Convex region given by boundary vertices. Construction normalizes the
// orientation to counter-clockwise and rejects non-convex input via the
// cross-product sign test.
struct ConvexPolygon {
  std::vector<Point2> pts;

  static ConvexPolygon from_points(std::vector<Point2> boundary);
  bool contains(Point2 v, double tol = 1e-12) const;
};

// Compact region used to restrict partitions: a finite union of convex
// polygons. An empty part list stands for the whole plane so the
// unrestricted calls read naturally.
struct Region {
  std::vector<ConvexPolygon> parts;

  static Region whole_plane() { return {}; }
  static Region rectangle(double x0, double x1, double y0, double y1);
  static Region polygon(std::vector<Point2> boundary);

  bool unrestricted() const { return parts.empty(); }
  bool contains(Point2 v, double tol = 1e-12) const;
  Region unite(const Region& other) const;
  Region transformed(const Affine2& g) const;
};

// One fold line contributing weight * |ax*x + ay*y + c| to a field.
struct AbsKink {
  double weight;
  double ax;
  double ay;
  double c;
};

// Continuous piecewise-affine scalar field: an affine part plus folds.
// Closed under addition, scaling, and composition with affine maps, which
// is what makes the property suite's equalities checkable exactly.
struct PiecewiseAffineField {
  double gx = 0.0;
  double gy = 0.0;
  double g0 = 0.0;
  std::vector<AbsKink> kinks;

  double operator()(Point2 v) const;
  PiecewiseAffineField scaled(double s) const;
  PiecewiseAffineField plus(const PiecewiseAffineField& other) const;
  // Pullback (*this) o g for an affine change of coordinates.
  PiecewiseAffineField pullback(const Affine2& g) const;
};

PiecewiseAffineField affine_field(double gx, double gy, double g0);

// Piecewise-constant field over a grid, one value per cell, zero outside.
struct GridField {
  Grid grid;
  std::vector<double> values;

  double operator()(Point2 v) const;
};

GridField grid_field(const Grid& grid, const DensityVector& f);

// Exact maximum of |f| over a bounded region, attained at a vertex of the
// arrangement cut by the fold lines.
double sup_abs(const PiecewiseAffineField& f, const Region& sigma);

// Variation of f along gamma over sigma: increments are collected inside
// each maximal stretch of the curve within sigma and summed across
// stretches; an excursion outside sigma closes the stretch, so no
// increment ever bridges one. That convention is what makes the variation
// add up exactly over adjacent regions. The exact overloads require a
// polyline and insert every breakpoint of the composition analytically;
// the generic overload refines partitions adaptively (bisect everywhere,
// pin region-boundary crossings by bisection, stop once a full round gains
// less than refine_tol) and reports a lower bound that never decreases
// under refinement within a stretch. Non-finite field values on the curve
// raise NumericalError.
double cvar(const PiecewiseAffineField& f, const Curve& gamma,
            const Region& sigma = Region::whole_plane());
double cvar(const GridField& f, const Curve& gamma,
            const Region& sigma = Region::whole_plane());
double cvar(const std::function<double(Point2)>& f, const Curve& gamma,
            const Region& sigma, double refine_tol);

// Exact variation of the pointwise product f*g along a polyline; the
// composition is piecewise quadratic, so each piece also splits at its
// extremum before the increments are summed.
double cvar_product(const PiecewiseAffineField& f, const PiecewiseAffineField& g,
                    const Curve& gamma, const Region& sigma = Region::whole_plane());

// Convex closed Jordan curve used for entry-point counting: a circle or a
// convex polygon boundary.
struct ConvexProbe {
  enum class Kind { Circle, Polygon };
  Kind kind = Kind::Circle;
  Point2 center{0.0, 0.0};
  double radius = 0.0;
  ConvexPolygon poly;

  static ConvexProbe circle(Point2 center, double radius);
  static ConvexProbe polygon(std::vector<Point2> boundary);
};

// Entry points of gamma on the probe curve: t = 0 when the curve starts on
// the probe, plus every instant where the curve returns to the probe after
// being off it. Hits closer than 1e-9 in parameter merge into one visit,
// so a grazing touch counts once. The tangency flag marks counts that a
// perturbation of the fixture could change.
struct EntryCount {
  int entries = 0;
  bool tangency = false;
};

EntryCount entry_points(const Curve& gamma, const ConvexProbe& probe);

// Largest entry count over the probes, clamped to at least one so it can
// serve as the normalizer in variation ratios. Exact for polylines against
// circle and convex-polygon probes.
int vf_estimate(const Curve& gamma, const std::vector<ConvexProbe>& probes);

// Named curve family with a fixed entry-count normalizer per member. The
// shipped families use the single-segment convention vf = 1; callers who
// want measured normalizers can rebuild them with vf_estimate against
// their own probes.
struct CurveFamily {
  std::vector<Curve> curves;
  std::vector<int> vf;
};

// Horizontal and vertical chords of the box, per_axis of each.
CurveFamily axis_segment_family(double x0, double x1, double y0, double y1,
                                int per_axis);
// Random polylines inside the box, between 3 and max_vertices vertices.
CurveFamily random_polyline_family(std::uint64_t seed, int count, int max_vertices,
                                   double x0, double x1, double y0, double y1);
// Circle discretized as a closed 64-gon polyline.
Curve circle_curve(Point2 center, double radius);

// Largest cvar/vf ratio over the family. Every reported value is a lower
// bound for the variation: cvar never overshoots the supremum over
// partitions and the family is finite, so the true supremum over all
// curves can only be larger.
double var_lower_bound(const PiecewiseAffineField& f, const Region& sigma,
                       const CurveFamily& family);
double var_lower_bound(const GridField& f, const Region& sigma,
                       const CurveFamily& family);
double var_lower_bound(const std::function<double(Point2)>& f, const Region& sigma,
                       const CurveFamily& family, double refine_tol);

// One line of the randomized property report. worst_margin is the smallest
// slack seen over all trials: inequalities record bound minus value,
// equalities record minus the absolute mismatch, so anything below -1e-10
// is a violation and the first offender is serialized as JSON.
struct PropertyLine {
  std::string name;
  int trials = 0;
  int failures = 0;
  double worst_margin = 0.0;
  std::string counterexample;
};

struct PropertyReport {
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<PropertyLine> lines;

  bool all_pass() const;
  std::string to_json() const;
};

// Randomized verification of the variation calculus on piecewise-affine
// fixtures: subadditivity, the product rule, absolute homogeneity,
// concatenation additivity, subcurve and region monotonicity, additivity
// over adjacent regions, affine change of variables, and the C^1
// derivative bound against the axis family. homogeneity_fault rescales one
// side of the homogeneity identity and exists so the self-test's failure
// path can be exercised deliberately; leave it at 1 for an honest run.
PropertyReport property_suite(int trials, std::uint64_t seed,
                              double homogeneity_fault = 1.0);

// Variation lower bounds of the densities f, Pf, ..., P^n f on the
// operator's grid, measured along the family (axis chords of the grid box
// when none is given). bounded reports whether a least-squares envelope
// plateau + coeff * rho^k (rho < 1) explains the sequence with a plateau
// near the observed peak and a small residual; a run cut off mid-transient
// reports false because the data cannot certify a plateau yet. Qualitative
// only, never a certified contraction constant.
struct ContractionReport {
  std::vector<double> variation;
  double head_peak = 0.0;
  double tail_peak = 0.0;
  double growth_ratio = 0.0;
  double plateau = 0.0;
  double fit_rms = 0.0;
  bool bounded = false;
};

ContractionReport variation_sequence(const UlamOperator& op, const DensityVector& f0,
                                     int n, const CurveFamily& family);
ContractionReport variation_sequence(const UlamOperator& op, const DensityVector& f0,
                                     int n);

// Convenience wrapper for the switched map: builds an Ulam operator on the
// burned-in attractor box and runs variation_sequence on the discretized
// f0, against the given family or the default axis chords. Requires a
// conserved regime; the divergent case raises InvalidArgument before any
// grid is built.
ContractionReport contraction_probe(const MapParams& params,
                                    const std::function<double(Point2)>& f0, int n,
                                    const CurveFamily& family, int grid_nx = 128,
                                    int grid_ny = 128);
ContractionReport contraction_probe(const MapParams& params,
                                    const std::function<double(Point2)>& f0, int n,
                                    int grid_nx = 128, int grid_ny = 128);

}  // namespace statper
