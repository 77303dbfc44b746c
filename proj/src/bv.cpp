#include "statper/bv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include <json.hpp>

#include "statper/ensemble.hpp"
#include "statper/regions.hpp"

namespace statper {

namespace {

constexpr double kMergeTol = 1e-12;
constexpr double kEntryTol = 1e-9;

double cross2(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double dot2(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
Point2 diff(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
Point2 lerp(Point2 p, Point2 q, double s) {
  return {p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Curves

Curve Curve::polyline(std::vector<Point2> pts) {
  if (pts.size() < 2) throw InvalidArgument("Curve::polyline: need at least 2 vertices");
  for (const Point2& p : pts)
    if (!is_finite(p)) throw InvalidArgument("Curve::polyline: non-finite vertex");
  Curve c;
  c.vertices = std::move(pts);
  return c;
}

Curve Curve::parametric(std::function<Point2(double)> f) {
  if (!f) throw InvalidArgument("Curve::parametric: empty parameter map");
  Curve c;
  c.param = std::move(f);
  return c;
}

int Curve::segment_count() const {
  return is_polyline() ? int(vertices.size()) - 1 : 0;
}

Point2 Curve::at(double t) const {
  if (is_polyline()) {
    int n = segment_count();
    double scaled = t * n;
    int i = std::clamp(int(std::floor(scaled)), 0, n - 1);
    return lerp(vertices[size_t(i)], vertices[size_t(i) + 1], scaled - i);
  }
  if (param) return param(t);
  throw InvalidArgument("Curve::at: curve has no representation");
}

// ---------------------------------------------------------------------------
// Regions

ConvexPolygon ConvexPolygon::from_points(std::vector<Point2> boundary) {
  if (boundary.size() >= 2) {
    Point2 a = boundary.front();
    Point2 b = boundary.back();
    if (std::fabs(a.x - b.x) < kMergeTol && std::fabs(a.y - b.y) < kMergeTol)
      boundary.pop_back();
  }
  if (boundary.size() < 3)
    throw InvalidArgument("ConvexPolygon: need at least 3 distinct vertices");
  for (const Point2& p : boundary)
    if (!is_finite(p)) throw InvalidArgument("ConvexPolygon: non-finite vertex");

  double area2 = 0.0;
  size_t n = boundary.size();
  for (size_t i = 0; i < n; ++i)
    area2 += cross2(boundary[i], boundary[(i + 1) % n]);
  if (area2 < 0.0) std::reverse(boundary.begin(), boundary.end());
  if (std::fabs(area2) <= 0.0)
    throw InvalidArgument("ConvexPolygon: degenerate (zero area)");

  for (size_t i = 0; i < n; ++i) {
    Point2 e1 = diff(boundary[(i + 1) % n], boundary[i]);
    Point2 e2 = diff(boundary[(i + 2) % n], boundary[(i + 1) % n]);
    double scale = std::hypot(e1.x, e1.y) * std::hypot(e2.x, e2.y);
    if (cross2(e1, e2) < -1e-9 * scale)
      throw InvalidArgument("ConvexPolygon: boundary is not convex");
  }
  ConvexPolygon poly;
  poly.pts = std::move(boundary);
  return poly;
}

bool ConvexPolygon::contains(Point2 v, double tol) const {
  size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    Point2 a = pts[i];
    Point2 e = diff(pts[(i + 1) % n], a);
    double len = std::hypot(e.x, e.y);
    if (cross2(e, diff(v, a)) < -tol * std::max(len, 1.0)) return false;
  }
  return true;
}

Region Region::rectangle(double x0, double x1, double y0, double y1) {
  if (!(x0 < x1) || !(y0 < y1))
    throw InvalidArgument("Region::rectangle: empty extent");
  return polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

Region Region::polygon(std::vector<Point2> boundary) {
  Region r;
  r.parts.push_back(ConvexPolygon::from_points(std::move(boundary)));
  return r;
}

bool Region::contains(Point2 v, double tol) const {
  if (unrestricted()) return true;
  for (const ConvexPolygon& p : parts)
    if (p.contains(v, tol)) return true;
  return false;
}

Region Region::unite(const Region& other) const {
  if (unrestricted() || other.unrestricted()) return whole_plane();
  Region r = *this;
  r.parts.insert(r.parts.end(), other.parts.begin(), other.parts.end());
  return r;
}

Region Region::transformed(const Affine2& g) const {
  Region r;
  for (const ConvexPolygon& p : parts) {
    std::vector<Point2> mapped;
    mapped.reserve(p.pts.size());
    for (Point2 v : p.pts) mapped.push_back(g(v));
    r.parts.push_back(ConvexPolygon::from_points(std::move(mapped)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fields

double PiecewiseAffineField::operator()(Point2 v) const {
  double out = gx * v.x + gy * v.y + g0;
  for (const AbsKink& k : kinks)
    out += k.weight * std::fabs(k.ax * v.x + k.ay * v.y + k.c);
  return out;
}

PiecewiseAffineField PiecewiseAffineField::scaled(double s) const {
  PiecewiseAffineField f = *this;
  f.gx *= s;
  f.gy *= s;
  f.g0 *= s;
  for (AbsKink& k : f.kinks) k.weight *= s;
  return f;
}

PiecewiseAffineField PiecewiseAffineField::plus(const PiecewiseAffineField& other) const {
  PiecewiseAffineField f = *this;
  f.gx += other.gx;
  f.gy += other.gy;
  f.g0 += other.g0;
  f.kinks.insert(f.kinks.end(), other.kinks.begin(), other.kinks.end());
  return f;
}

PiecewiseAffineField PiecewiseAffineField::pullback(const Affine2& g) const {
  PiecewiseAffineField f;
  f.gx = gx * g.m.a + gy * g.m.c;
  f.gy = gx * g.m.b + gy * g.m.d;
  f.g0 = gx * g.t.x + gy * g.t.y + g0;
  f.kinks.reserve(kinks.size());
  for (const AbsKink& k : kinks) {
    AbsKink kk;
    kk.weight = k.weight;
    kk.ax = k.ax * g.m.a + k.ay * g.m.c;
    kk.ay = k.ax * g.m.b + k.ay * g.m.d;
    kk.c = k.ax * g.t.x + k.ay * g.t.y + k.c;
    f.kinks.push_back(kk);
  }
  return f;
}

PiecewiseAffineField affine_field(double gx, double gy, double g0) {
  PiecewiseAffineField f;
  f.gx = gx;
  f.gy = gy;
  f.g0 = g0;
  return f;
}

double GridField::operator()(Point2 v) const {
  int idx = grid.cell_index(v);
  if (idx < 0 || size_t(idx) >= values.size()) return 0.0;
  return values[size_t(idx)];
}

GridField grid_field(const Grid& grid, const DensityVector& f) {
  if (f.values.size() != size_t(grid.cells()))
    throw InvalidArgument("grid_field: value count does not match the grid");
  return GridField{grid, f.values};
}

double sup_abs(const PiecewiseAffineField& f, const Region& sigma) {
  if (sigma.unrestricted())
    throw InvalidArgument("sup_abs: needs a bounded region");
  double best = 0.0;
  auto consider = [&](Point2 v) { best = std::max(best, std::fabs(f(v))); };

  for (const ConvexPolygon& part : sigma.parts) {
    size_t n = part.pts.size();
    for (Point2 v : part.pts) consider(v);

    for (const AbsKink& k : f.kinks) {
      if (std::hypot(k.ax, k.ay) < 1e-12) continue;
      for (size_t i = 0; i < n; ++i) {
        Point2 a = part.pts[i];
        Point2 e = diff(part.pts[(i + 1) % n], a);
        double denom = k.ax * e.x + k.ay * e.y;
        if (std::fabs(denom) < 1e-14) continue;
        double u = -(k.ax * a.x + k.ay * a.y + k.c) / denom;
        if (u >= -1e-12 && u <= 1.0 + 1e-12)
          consider({a.x + u * e.x, a.y + u * e.y});
      }
    }

    for (size_t i = 0; i < f.kinks.size(); ++i) {
      for (size_t j = i + 1; j < f.kinks.size(); ++j) {
        const AbsKink& p = f.kinks[i];
        const AbsKink& q = f.kinks[j];
        double det = p.ax * q.ay - p.ay * q.ax;
        if (std::fabs(det) < 1e-14) continue;
        Point2 v{(q.c * p.ay - p.c * q.ay) / det, (p.c * q.ax - q.c * p.ax) / det};
        if (part.contains(v, 1e-9)) consider(v);
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Visit intervals: the parameter set where the polyline sits inside sigma,
// as a sorted list of disjoint closed intervals. Partition points have to
// come from this set; increments across the gaps still count.

namespace {

struct Interval {
  double lo;
  double hi;
};

void clip_segment(Point2 p, Point2 q, const ConvexPolygon& poly, double& lo, double& hi) {
  Point2 d = diff(q, p);
  size_t n = poly.pts.size();
  for (size_t i = 0; i < n && lo <= hi; ++i) {
    Point2 a = poly.pts[i];
    Point2 e = diff(poly.pts[(i + 1) % n], a);
    double c0 = cross2(e, diff(p, a));
    double c1 = cross2(e, d);
    if (std::fabs(c1) < 1e-300) {
      if (c0 < 0.0) {
        lo = 1.0;
        hi = 0.0;
      }
      continue;
    }
    double root = -c0 / c1;
    if (c1 > 0.0)
      lo = std::max(lo, root);
    else
      hi = std::min(hi, root);
  }
}

std::vector<Interval> polyline_visits(const std::vector<Point2>& verts, const Region& sigma) {
  int n = int(verts.size()) - 1;
  if (sigma.unrestricted()) return {{0.0, 1.0}};

  std::vector<Interval> raw;
  for (int i = 0; i < n; ++i) {
    for (const ConvexPolygon& part : sigma.parts) {
      double lo = 0.0, hi = 1.0;
      clip_segment(verts[size_t(i)], verts[size_t(i) + 1], part, lo, hi);
      if (lo <= hi + kMergeTol) {
        lo = std::clamp(lo, 0.0, 1.0);
        hi = std::clamp(hi, 0.0, 1.0);
        raw.push_back({(i + lo) / n, (i + hi) / n});
      }
    }
  }
  if (raw.empty()) return raw;

  std::sort(raw.begin(), raw.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  merged.push_back(raw.front());
  for (size_t i = 1; i < raw.size(); ++i) {
    if (raw[i].lo <= merged.back().hi + kMergeTol)
      merged.back().hi = std::max(merged.back().hi, raw[i].hi);
    else
      merged.push_back(raw[i]);
  }
  return merged;
}

// Sorted deduplicated knots for one visit interval. extra_knots receives
// per-segment breakpoints through the callback.
template <typename PerSegment>
std::vector<double> visit_knots(const std::vector<Point2>& verts, double u, double w,
                                const PerSegment& per_segment) {
  int n = int(verts.size()) - 1;
  std::vector<double> ts{u, w};
  int i_first = std::clamp(int(std::floor(u * n)), 0, n - 1);
  int i_last = std::clamp(int(std::floor(w * n - 1e-15)), 0, n - 1);
  for (int i = i_first; i <= i_last; ++i) {
    double tb = double(i) / n;
    if (tb > u && tb < w) ts.push_back(tb);
    double sa = std::max(0.0, u * n - i);
    double sb = std::min(1.0, w * n - i);
    if (sa < sb) per_segment(i, sa, sb, ts);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(),
                       [](double a, double b) { return b - a < 1e-15; }),
           ts.end());
  return ts;
}

void require_finite(double v) {
  if (!std::isfinite(v))
    throw NumericalError("cvar: non-finite field value on the curve");
}

void pa_segment_knots(const PiecewiseAffineField& f, const std::vector<Point2>& verts,
                      int i, double sa, double sb, std::vector<double>& ts) {
  int n = int(verts.size()) - 1;
  Point2 p = verts[size_t(i)];
  Point2 d = diff(verts[size_t(i) + 1], p);
  for (const AbsKink& k : f.kinks) {
    double l1 = k.ax * d.x + k.ay * d.y;
    if (std::fabs(l1) < 1e-300) continue;
    double s = -(k.ax * p.x + k.ay * p.y + k.c) / l1;
    if (s > sa && s < sb) ts.push_back((i + s) / n);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// cvar

double cvar(const PiecewiseAffineField& f, const Curve& gamma, const Region& sigma) {
  if (!gamma.is_polyline())
    throw InvalidArgument("cvar: exact evaluation needs a polyline curve");
  const std::vector<Point2>& verts = gamma.vertices;
  double total = 0.0;
  for (const Interval& iv : polyline_visits(verts, sigma)) {
    std::vector<double> ts = visit_knots(
        verts, iv.lo, iv.hi,
        [&](int i, double sa, double sb, std::vector<double>& out) {
          pa_segment_knots(f, verts, i, sa, sb, out);
        });
    double prev = f(gamma.at(ts.front()));
    require_finite(prev);
    for (size_t j = 1; j < ts.size(); ++j) {
      double v = f(gamma.at(ts[j]));
      require_finite(v);
      total += std::fabs(v - prev);
      prev = v;
    }
  }
  return total;
}

double cvar_product(const PiecewiseAffineField& f, const PiecewiseAffineField& g,
                    const Curve& gamma, const Region& sigma) {
  if (!gamma.is_polyline())
    throw InvalidArgument("cvar_product: exact evaluation needs a polyline curve");
  const std::vector<Point2>& verts = gamma.vertices;
  auto value = [&](double t) {
    Point2 p = gamma.at(t);
    double v = f(p) * g(p);
    require_finite(v);
    return v;
  };

  double total = 0.0;
  for (const Interval& iv : polyline_visits(verts, sigma)) {
    std::vector<double> ts = visit_knots(
        verts, iv.lo, iv.hi,
        [&](int i, double sa, double sb, std::vector<double>& out) {
          pa_segment_knots(f, verts, i, sa, sb, out);
          pa_segment_knots(g, verts, i, sa, sb, out);
        });
    double prev = value(ts.front());
    double prev_t = ts.front();
    for (size_t j = 1; j < ts.size(); ++j) {
      double t = ts[j];
      double v = value(t);
      // Each knot-free piece is a quadratic in t; if its extremum falls
      // inside, the piece is not monotone and splits there.
      double span = t - prev_t;
      double piece = std::fabs(v - prev);
      if (span > 1e-14) {
        double tm = 0.5 * (prev_t + t);
        Point2 pm = gamma.at(tm);
        double f1 = (f(gamma.at(t)) - f(gamma.at(prev_t))) / span;
        double g1 = (g(gamma.at(t)) - g(gamma.at(prev_t))) / span;
        double f0 = f(pm) - f1 * tm;
        double g0 = g(pm) - g1 * tm;
        double quad = f1 * g1;
        if (std::fabs(quad) > 1e-300) {
          double tstar = -(f0 * g1 + f1 * g0) / (2.0 * quad);
          if (tstar > prev_t + 1e-15 && tstar < t - 1e-15) {
            double vstar = value(tstar);
            piece = std::fabs(vstar - prev) + std::fabs(v - vstar);
          }
        }
      }
      total += piece;
      prev = v;
      prev_t = t;
    }
  }
  return total;
}

double cvar(const GridField& f, const Curve& gamma, const Region& sigma) {
  if (!gamma.is_polyline())
    throw InvalidArgument("cvar: exact evaluation needs a polyline curve");
  const std::vector<Point2>& verts = gamma.vertices;
  const Grid& grid = f.grid;

  auto wall_knots = [&](int i, double sa, double sb, std::vector<double>& out) {
    int n = int(verts.size()) - 1;
    Point2 p = verts[size_t(i)];
    Point2 d = diff(verts[size_t(i) + 1], p);
    Point2 a = lerp(p, verts[size_t(i) + 1], sa);
    Point2 b = lerp(p, verts[size_t(i) + 1], sb);
    if (std::fabs(d.x) > 1e-300) {
      double w = grid.cell_width();
      double xmin = std::min(a.x, b.x), xmax = std::max(a.x, b.x);
      long k0 = long(std::ceil((xmin - grid.x_lo()) / w - 1e-12));
      long k1 = long(std::floor((xmax - grid.x_lo()) / w + 1e-12));
      for (long k = std::max(k0, 0L); k <= std::min(k1, long(grid.nx())); ++k) {
        double s = (grid.x_lo() + k * w - p.x) / d.x;
        if (s > sa + 1e-15 && s < sb - 1e-15) out.push_back((i + s) / n);
      }
    }
    if (std::fabs(d.y) > 1e-300) {
      double h = grid.cell_height();
      double ymin = std::min(a.y, b.y), ymax = std::max(a.y, b.y);
      long k0 = long(std::ceil((ymin - grid.y_lo()) / h - 1e-12));
      long k1 = long(std::floor((ymax - grid.y_lo()) / h + 1e-12));
      for (long k = std::max(k0, 0L); k <= std::min(k1, long(grid.ny())); ++k) {
        double s = (grid.y_lo() + k * h - p.y) / d.y;
        if (s > sa + 1e-15 && s < sb - 1e-15) out.push_back((i + s) / n);
      }
    }
  };

  double total = 0.0;
  for (const Interval& iv : polyline_visits(verts, sigma)) {
    std::vector<double> ts = visit_knots(verts, iv.lo, iv.hi, wall_knots);
    // The field jumps at the knots, so pieces are probed at their
    // midpoints; a zero-length visit has no pieces and contributes nothing.
    bool started = false;
    double prev = 0.0;
    for (size_t j = 1; j < ts.size(); ++j) {
      double v = f(gamma.at(0.5 * (ts[j - 1] + ts[j])));
      require_finite(v);
      if (started) total += std::fabs(v - prev);
      prev = v;
      started = true;
    }
  }
  return total;
}

double cvar(const std::function<double(Point2)>& f, const Curve& gamma,
            const Region& sigma, double refine_tol) {
  if (!f) throw InvalidArgument("cvar: empty field");
  if (!(refine_tol > 0.0)) throw InvalidArgument("cvar: refine_tol must be positive");

  std::vector<double> ts;
  int base = 128;
  ts.reserve(size_t(base) + 1);
  for (int i = 0; i <= base; ++i) ts.push_back(double(i) / base);
  if (gamma.is_polyline()) {
    int n = gamma.segment_count();
    for (int i = 1; i < n; ++i) ts.push_back(double(i) / n);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  }

  auto chain_sum = [&](const std::vector<double>& knots) {
    double total = 0.0;
    bool has_prev = false;
    double prev = 0.0;
    for (double t : knots) {
      Point2 p = gamma.at(t);
      if (!is_finite(p))
        throw NumericalError("cvar: curve evaluated to a non-finite point");
      if (!sigma.contains(p, kMergeTol)) {
        // Leaving sigma closes the current stretch; increments never
        // straddle an excursion.
        has_prev = false;
        continue;
      }
      double v = f(p);
      require_finite(v);
      if (has_prev) total += std::fabs(v - prev);
      prev = v;
      has_prev = true;
    }
    return total;
  };

  auto inside = [&](double t) { return sigma.contains(gamma.at(t), kMergeTol); };

  // Pins each sigma-boundary crossing between adjacent knots down to the
  // edge, so a visit's first and last increments are not left hanging on
  // the sampling grid.
  auto sharpen_edges = [&](std::vector<double>& knots) {
    if (sigma.unrestricted()) return;
    std::vector<double> extra;
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
      double a = knots[i], b = knots[i + 1];
      bool ina = inside(a);
      if (ina == inside(b)) continue;
      for (int step = 0; step < 48 && b - a > 1e-15; ++step) {
        double m = 0.5 * (a + b);
        (inside(m) == ina ? a : b) = m;
      }
      extra.push_back(a);
      extra.push_back(b);
    }
    if (extra.empty()) return;
    knots.insert(knots.end(), extra.begin(), extra.end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  };

  sharpen_edges(ts);
  double current = chain_sum(ts);
  for (int round = 0; round < 26 && ts.size() < (size_t(1) << 21); ++round) {
    std::vector<double> finer;
    finer.reserve(ts.size() * 2);
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
      finer.push_back(ts[i]);
      finer.push_back(0.5 * (ts[i] + ts[i + 1]));
    }
    finer.push_back(ts.back());
    sharpen_edges(finer);
    double refined = chain_sum(finer);
    ts.swap(finer);
    double gain = refined - current;
    current = std::max(current, refined);
    if (gain < refine_tol) break;
  }
  return current;
}

// ---------------------------------------------------------------------------
// Entry points

ConvexProbe ConvexProbe::circle(Point2 center, double radius) {
  if (!(radius > 0.0) || !is_finite(center))
    throw InvalidArgument("ConvexProbe::circle: need a finite center and positive radius");
  ConvexProbe p;
  p.kind = Kind::Circle;
  p.center = center;
  p.radius = radius;
  return p;
}

ConvexProbe ConvexProbe::polygon(std::vector<Point2> boundary) {
  ConvexProbe p;
  p.kind = Kind::Polygon;
  p.poly = ConvexPolygon::from_points(std::move(boundary));
  return p;
}

EntryCount entry_points(const Curve& gamma, const ConvexProbe& probe) {
  if (!gamma.is_polyline())
    throw InvalidArgument("entry_points: needs a polyline curve");
  const std::vector<Point2>& verts = gamma.vertices;
  int n = int(verts.size()) - 1;

  std::vector<Interval> hits;
  bool tangency = false;
  auto push_point = [&](int i, double s) {
    s = std::clamp(s, 0.0, 1.0);
    double t = (i + s) / n;
    hits.push_back({t, t});
  };

  for (int i = 0; i < n; ++i) {
    Point2 p = verts[size_t(i)];
    Point2 q = verts[size_t(i) + 1];
    Point2 d = diff(q, p);
    double len2 = dot2(d, d);
    if (len2 <= 0.0) continue;

    if (probe.kind == ConvexProbe::Kind::Circle) {
      Point2 pc = diff(p, probe.center);
      double a = len2;
      double b = 2.0 * dot2(d, pc);
      double c = dot2(pc, pc) - probe.radius * probe.radius;
      double disc = b * b - 4.0 * a * c;
      double scale = b * b + std::fabs(4.0 * a * c) + 1e-30;
      if (disc > 1e-12 * scale) {
        double sd = std::sqrt(disc);
        for (double s : {(-b - sd) / (2.0 * a), (-b + sd) / (2.0 * a)})
          if (s >= -1e-12 && s <= 1.0 + 1e-12) push_point(i, s);
      } else if (disc > -1e-12 * scale) {
        double s = -b / (2.0 * a);
        if (s >= -1e-12 && s <= 1.0 + 1e-12) {
          push_point(i, s);
          tangency = true;
        }
      }
    } else {
      const std::vector<Point2>& poly = probe.poly.pts;
      size_t m = poly.size();
      for (size_t e = 0; e < m; ++e) {
        Point2 a = poly[e];
        Point2 ed = diff(poly[(e + 1) % m], a);
        double denom = cross2(d, ed);
        Point2 ap = diff(a, p);
        double scale = std::sqrt(len2) * std::hypot(ed.x, ed.y);
        if (std::fabs(denom) > 1e-12 * scale) {
          double s = cross2(ap, ed) / denom;
          double u = cross2(ap, d) / denom;
          if (s >= -1e-12 && s <= 1.0 + 1e-12 && u >= -1e-12 && u <= 1.0 + 1e-12) {
            push_point(i, s);
            if (std::min({std::fabs(u), std::fabs(1.0 - u), std::fabs(s),
                          std::fabs(1.0 - s)}) < kEntryTol)
              tangency = true;
          }
        } else if (std::fabs(cross2(d, ap)) / std::sqrt(len2) <= kEntryTol) {
          double sa = dot2(ap, d) / len2;
          double sb = dot2(diff(poly[(e + 1) % m], p), d) / len2;
          double lo = std::clamp(std::min(sa, sb), 0.0, 1.0);
          double hi = std::clamp(std::max(sa, sb), 0.0, 1.0);
          if (lo <= hi) hits.push_back({(i + lo) / n, (i + hi) / n});
        }
      }
    }
  }

  if (hits.empty()) return {0, tangency};
  std::sort(hits.begin(), hits.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> visits;
  visits.push_back(hits.front());
  for (size_t i = 1; i < hits.size(); ++i) {
    if (hits[i].lo <= visits.back().hi + kEntryTol)
      visits.back().hi = std::max(visits.back().hi, hits[i].hi);
    else
      visits.push_back(hits[i]);
  }

  // On a closed curve the touch straddling the seam is one visit.
  Point2 a = verts.front();
  Point2 b = verts.back();
  bool closed = std::fabs(a.x - b.x) < kMergeTol && std::fabs(a.y - b.y) < kMergeTol;
  if (closed && visits.size() >= 2 && visits.front().lo <= kEntryTol &&
      visits.back().hi >= 1.0 - kEntryTol)
    visits.pop_back();

  return {int(visits.size()), tangency};
}

int vf_estimate(const Curve& gamma, const std::vector<ConvexProbe>& probes) {
  if (probes.empty())
    throw InvalidArgument("vf_estimate: need at least one probe");
  int best = 0;
  for (const ConvexProbe& probe : probes)
    best = std::max(best, entry_points(gamma, probe).entries);
  return std::max(best, 1);
}

// ---------------------------------------------------------------------------
// Curve families

CurveFamily axis_segment_family(double x0, double x1, double y0, double y1,
                                int per_axis) {
  if (!(x0 < x1) || !(y0 < y1) || per_axis < 1)
    throw InvalidArgument("axis_segment_family: bad box or count");
  CurveFamily fam;
  for (int j = 0; j < per_axis; ++j) {
    double y = y0 + (j + 0.5) * (y1 - y0) / per_axis;
    fam.curves.push_back(Curve::polyline({{x0, y}, {x1, y}}));
    fam.vf.push_back(1);
  }
  for (int j = 0; j < per_axis; ++j) {
    double x = x0 + (j + 0.5) * (x1 - x0) / per_axis;
    fam.curves.push_back(Curve::polyline({{x, y0}, {x, y1}}));
    fam.vf.push_back(1);
  }
  return fam;
}

CurveFamily random_polyline_family(std::uint64_t seed, int count, int max_vertices,
                                   double x0, double x1, double y0, double y1) {
  if (count < 1 || max_vertices < 3 || max_vertices > 32)
    throw InvalidArgument("random_polyline_family: need count >= 1 and 3 <= max_vertices <= 32");
  if (!(x0 < x1) || !(y0 < y1))
    throw InvalidArgument("random_polyline_family: bad box");
  std::mt19937_64 rng(seed);
  auto u01 = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };
  CurveFamily fam;
  for (int i = 0; i < count; ++i) {
    int nv = 3 + int(rng() % std::uint64_t(max_vertices - 2));
    std::vector<Point2> pts;
    pts.reserve(size_t(nv));
    for (int j = 0; j < nv; ++j)
      pts.push_back({x0 + u01() * (x1 - x0), y0 + u01() * (y1 - y0)});
    fam.curves.push_back(Curve::polyline(std::move(pts)));
    fam.vf.push_back(1);
  }
  return fam;
}

Curve circle_curve(Point2 center, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("circle_curve: radius must be positive");
  constexpr int kSides = 64;
  std::vector<Point2> pts;
  pts.reserve(kSides + 1);
  for (int k = 0; k < kSides; ++k) {
    double ang = 2.0 * 3.14159265358979323846 * k / kSides;
    pts.push_back({center.x + radius * std::cos(ang), center.y + radius * std::sin(ang)});
  }
  pts.push_back(pts.front());
  return Curve::polyline(std::move(pts));
}

// ---------------------------------------------------------------------------
// Variation lower bounds

namespace {

int family_vf(const CurveFamily& family, size_t i) {
  if (i < family.vf.size()) return std::max(family.vf[i], 1);
  return 1;
}

template <typename CvarFn>
double family_max(const CurveFamily& family, const CvarFn& eval) {
  if (family.curves.empty())
    throw InvalidArgument("var_lower_bound: empty curve family");
  double best = 0.0;
  for (size_t i = 0; i < family.curves.size(); ++i)
    best = std::max(best, eval(family.curves[i]) / family_vf(family, i));
  return best;
}

}  // namespace

double var_lower_bound(const PiecewiseAffineField& f, const Region& sigma,
                       const CurveFamily& family) {
  return family_max(family, [&](const Curve& c) { return cvar(f, c, sigma); });
}

double var_lower_bound(const GridField& f, const Region& sigma,
                       const CurveFamily& family) {
  return family_max(family, [&](const Curve& c) { return cvar(f, c, sigma); });
}

double var_lower_bound(const std::function<double(Point2)>& f, const Region& sigma,
                       const CurveFamily& family, double refine_tol) {
  return family_max(family,
                    [&](const Curve& c) { return cvar(f, c, sigma, refine_tol); });
}

// ---------------------------------------------------------------------------
// Property suite

namespace {

struct FixtureRng {
  std::mt19937_64 gen;

  explicit FixtureRng(std::uint64_t seed) : gen(seed) {}
  double u01() { return double(gen() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + u01() * (b - a); }
  int pick(int lo, int hi) { return lo + int(gen() % std::uint64_t(hi - lo + 1)); }
};

nlohmann::json field_json(const PiecewiseAffineField& f) {
  nlohmann::json j;
  j["affine"] = {f.gx, f.gy, f.g0};
  nlohmann::json kinks = nlohmann::json::array();
  for (const AbsKink& k : f.kinks) kinks.push_back({k.weight, k.ax, k.ay, k.c});
  j["kinks"] = kinks;
  return j;
}

nlohmann::json curve_json(const std::vector<Point2>& pts) {
  nlohmann::json j = nlohmann::json::array();
  for (Point2 p : pts) j.push_back({p.x, p.y});
  return j;
}

struct LineTracker {
  PropertyLine line;

  explicit LineTracker(std::string name) {
    line.name = std::move(name);
    line.worst_margin = std::numeric_limits<double>::infinity();
  }

  void record(double margin, const std::function<nlohmann::json()>& describe) {
    ++line.trials;
    line.worst_margin = std::min(line.worst_margin, margin);
    if (margin < -1e-10 && ++line.failures == 1)
      line.counterexample = describe().dump();
  }

  PropertyLine finish() const {
    PropertyLine out = line;
    if (out.trials == 0) out.worst_margin = 0.0;
    return out;
  }
};

PiecewiseAffineField random_field(FixtureRng& rng, double cx, double cy) {
  PiecewiseAffineField f;
  f.gx = rng.uniform(-2.0, 2.0);
  f.gy = rng.uniform(-2.0, 2.0);
  f.g0 = rng.uniform(-1.0, 1.0);
  int nk = rng.pick(1, 3);
  for (int k = 0; k < nk; ++k) {
    AbsKink kink;
    kink.weight = rng.uniform(-2.0, 2.0);
    double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    kink.ax = std::cos(phi);
    kink.ay = std::sin(phi);
    kink.c = -(kink.ax * cx + kink.ay * cy) + rng.uniform(-1.5, 1.5);
    f.kinks.push_back(kink);
  }
  return f;
}

std::vector<Point2> random_vertices(FixtureRng& rng, int count, double x0, double x1,
                                    double y0, double y1) {
  std::vector<Point2> pts;
  pts.reserve(size_t(count));
  for (int i = 0; i < count; ++i)
    pts.push_back({rng.uniform(x0, x1), rng.uniform(y0, y1)});
  return pts;
}

}  // namespace

bool PropertyReport::all_pass() const {
  for (const PropertyLine& line : lines)
    if (line.failures > 0) return false;
  return true;
}

std::string PropertyReport::to_json() const {
  nlohmann::json j;
  j["schema"] = "statper-bv-report/1";
  j["trials"] = trials;
  j["seed"] = seed;
  j["all_pass"] = all_pass();
  nlohmann::json arr = nlohmann::json::array();
  for (const PropertyLine& line : lines) {
    nlohmann::json lj;
    lj["name"] = line.name;
    lj["trials"] = line.trials;
    lj["failures"] = line.failures;
    lj["worst_margin"] = line.worst_margin;
    if (line.counterexample.empty())
      lj["counterexample"] = nullptr;
    else
      lj["counterexample"] = nlohmann::json::parse(line.counterexample);
    arr.push_back(lj);
  }
  j["lines"] = arr;
  return j.dump(2) + "\n";
}

PropertyReport property_suite(int trials, std::uint64_t seed, double homogeneity_fault) {
  if (trials < 1) throw InvalidArgument("property_suite: trials must be positive");

  FixtureRng rng(seed);
  LineTracker subadd("subadditivity");
  LineTracker product("product_rule");
  LineTracker homog("homogeneity");
  LineTracker concat("concatenation");
  LineTracker subcurve("subcurve_monotonicity");
  LineTracker submono("region_monotonicity");
  LineTracker adjacency("adjacency_additivity");
  LineTracker changevar("change_of_variables");
  LineTracker c1bound("c1_derivative_bound");

  for (int trial = 0; trial < trials; ++trial) {
    double sx0 = rng.uniform(-2.5, -0.5);
    double sw = rng.uniform(1.0, 3.0);
    double sy0 = rng.uniform(-2.5, -0.5);
    double sh = rng.uniform(1.0, 3.0);
    double sx1 = sx0 + sw;
    double sy1 = sy0 + sh;
    Region sigma = Region::rectangle(sx0, sx1, sy0, sy1);
    double cx = 0.5 * (sx0 + sx1);
    double cy = 0.5 * (sy0 + sy1);

    PiecewiseAffineField f = random_field(rng, cx, cy);
    PiecewiseAffineField g = random_field(rng, cx, cy);

    // Main polyline overshoots the region on purpose so the partition
    // restriction and the jump terms across the gaps get exercised.
    double ox = 0.4 * sw, oy = 0.4 * sh;
    int nv = rng.pick(3, 7);
    std::vector<Point2> verts =
        random_vertices(rng, nv, sx0 - ox, sx1 + ox, sy0 - oy, sy1 + oy);
    Curve gamma = Curve::polyline(verts);

    double alpha = rng.uniform(-3.0, 3.0);

    // Concatenation fixture: junction vertex kept strictly inside sigma.
    int nv1 = rng.pick(2, 4);
    int nv2 = rng.pick(2, 4);
    std::vector<Point2> joined =
        random_vertices(rng, nv1 - 1, sx0 - ox, sx1 + ox, sy0 - oy, sy1 + oy);
    joined.push_back({rng.uniform(sx0 + 0.05 * sw, sx1 - 0.05 * sw),
                      rng.uniform(sy0 + 0.05 * sh, sy1 - 0.05 * sh)});
    int junction = nv1 - 1;
    {
      std::vector<Point2> tail =
          random_vertices(rng, nv2 - 1, sx0 - ox, sx1 + ox, sy0 - oy, sy1 + oy);
      joined.insert(joined.end(), tail.begin(), tail.end());
    }

    int cut = rng.pick(1, nv - 1);

    double mx0 = sx0 + sw * rng.uniform(0.05, 0.35);
    double mx1 = sx1 - sw * rng.uniform(0.05, 0.35);
    double my0 = sy0 + sh * rng.uniform(0.05, 0.35);
    double my1 = sy1 - sh * rng.uniform(0.05, 0.35);
    Region sigma_inner = Region::rectangle(mx0, mx1, my0, my1);

    bool split_in_x = (rng.gen() & 1u) != 0;
    double split_frac = rng.uniform(0.3, 0.7);
    std::vector<Point2> adj_verts = random_vertices(
        rng, rng.pick(4, 6), sx0 + 1e-3 * sw, sx1 - 1e-3 * sw, sy0 + 1e-3 * sh,
        sy1 - 1e-3 * sh);

    double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    double scale = rng.uniform(0.5, 2.0);
    Point2 shift{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    double cvx0 = sx0 + sw * rng.uniform(0.05, 0.3);
    double cvx1 = sx1 - sw * rng.uniform(0.05, 0.3);
    double cvy0 = sy0 + sh * rng.uniform(0.05, 0.3);
    double cvy1 = sy1 - sh * rng.uniform(0.05, 0.3);

    double ts1 = rng.uniform(-2.0, 2.0), ta1 = rng.uniform(-2.0, 2.0);
    double tb1 = rng.uniform(-2.0, 2.0), tc1 = rng.uniform(-2.0, 2.0);
    double ts2 = rng.uniform(-2.0, 2.0), ta2 = rng.uniform(-2.0, 2.0);
    double tb2 = rng.uniform(-2.0, 2.0), tc2 = rng.uniform(-2.0, 2.0);

    auto base_json = [&](const char* check) {
      nlohmann::json j;
      j["check"] = check;
      j["trial"] = trial;
      j["sigma"] = {sx0, sx1, sy0, sy1};
      j["curve"] = curve_json(verts);
      j["field_f"] = field_json(f);
      return j;
    };

    {
      double lhs = cvar(f.plus(g), gamma, sigma);
      double rhs = cvar(f, gamma, sigma) + cvar(g, gamma, sigma);
      subadd.record(rhs - lhs, [&] {
        nlohmann::json j = base_json("subadditivity");
        j["field_g"] = field_json(g);
        return j;
      });
    }

    {
      double lhs = cvar_product(f, g, gamma, sigma);
      double rhs = sup_abs(f, sigma) * cvar(g, gamma, sigma) +
                   sup_abs(g, sigma) * cvar(f, gamma, sigma);
      product.record(rhs - lhs, [&] {
        nlohmann::json j = base_json("product_rule");
        j["field_g"] = field_json(g);
        return j;
      });
    }

    {
      double lhs = cvar(f.scaled(alpha * homogeneity_fault), gamma, sigma);
      double rhs = std::fabs(alpha) * cvar(f, gamma, sigma);
      homog.record(-std::fabs(lhs - rhs), [&] {
        nlohmann::json j = base_json("homogeneity");
        j["alpha"] = alpha;
        return j;
      });
    }

    {
      Curve whole = Curve::polyline(joined);
      Curve first = Curve::polyline(std::vector<Point2>(
          joined.begin(), joined.begin() + junction + 1));
      Curve second = Curve::polyline(std::vector<Point2>(
          joined.begin() + junction, joined.end()));
      double lhs = cvar(f, whole, sigma);
      double rhs = cvar(f, first, sigma) + cvar(f, second, sigma);
      concat.record(-std::fabs(lhs - rhs), [&] {
        nlohmann::json j = base_json("concatenation");
        j["curve"] = curve_json(joined);
        j["junction"] = junction;
        return j;
      });
    }

    {
      Curve prefix = Curve::polyline(
          std::vector<Point2>(verts.begin(), verts.begin() + cut + 1));
      double lhs = cvar(f, prefix, sigma);
      double rhs = cvar(f, gamma, sigma);
      subcurve.record(rhs - lhs, [&] {
        nlohmann::json j = base_json("subcurve_monotonicity");
        j["cut_vertex"] = cut;
        return j;
      });
    }

    {
      double lhs = cvar(f, gamma, sigma_inner);
      double rhs = cvar(f, gamma, sigma);
      submono.record(rhs - lhs, [&] {
        nlohmann::json j = base_json("region_monotonicity");
        j["sigma_inner"] = {mx0, mx1, my0, my1};
        return j;
      });
    }

    {
      Region part1 = split_in_x
                         ? Region::rectangle(sx0, sx0 + sw * split_frac, sy0, sy1)
                         : Region::rectangle(sx0, sx1, sy0, sy0 + sh * split_frac);
      Region part2 = split_in_x
                         ? Region::rectangle(sx0 + sw * split_frac, sx1, sy0, sy1)
                         : Region::rectangle(sx0, sx1, sy0 + sh * split_frac, sy1);
      Curve inside = Curve::polyline(adj_verts);
      double lhs = cvar(f, inside, part1.unite(part2));
      double rhs = cvar(f, inside, part1) + cvar(f, inside, part2);
      adjacency.record(-std::fabs(lhs - rhs), [&] {
        nlohmann::json j = base_json("adjacency_additivity");
        j["curve"] = curve_json(adj_verts);
        j["split_in_x"] = split_in_x;
        j["split_fraction"] = split_frac;
        return j;
      });
    }

    {
      Affine2 gm;
      gm.m = Mat2{scale * std::cos(theta), -scale * std::sin(theta),
                  scale * std::sin(theta), scale * std::cos(theta)};
      gm.t = shift;
      Region sigma_cv = Region::rectangle(cvx0, cvx1, cvy0, cvy1);
      std::vector<Point2> mapped;
      mapped.reserve(verts.size());
      for (Point2 v : verts) mapped.push_back(gm(v));
      double lhs = cvar(f.pullback(gm), gamma, sigma_cv);
      double rhs = cvar(f, Curve::polyline(mapped), sigma_cv.transformed(gm));
      changevar.record(-std::fabs(lhs - rhs), [&] {
        nlohmann::json j = base_json("change_of_variables");
        j["sigma_inner"] = {cvx0, cvx1, cvy0, cvy1};
        j["rotation"] = theta;
        j["scale"] = scale;
        j["shift"] = {shift.x, shift.y};
        return j;
      });
    }

    {
      auto smooth = [=](Point2 p) {
        return ts1 * std::sin(ta1 * p.x + tb1 * p.y + tc1) +
               ts2 * std::cos(ta2 * p.x + tb2 * p.y + tc2);
      };
      double bound = std::fabs(ts1) * std::max(std::fabs(ta1), std::fabs(tb1)) +
                     std::fabs(ts2) * std::max(std::fabs(ta2), std::fabs(tb2));
      CurveFamily chords = axis_segment_family(sx0, sx1, sy0, sy1, 4);
      double lhs = var_lower_bound(std::function<double(Point2)>(smooth), sigma,
                                   chords, 1e-6);
      double rhs = bound * var_lower_bound(affine_field(1.0, 1.0, 0.0), sigma, chords);
      c1bound.record(rhs - lhs, [&] {
        nlohmann::json j = base_json("c1_derivative_bound");
        j["trig"] = {ts1, ta1, tb1, tc1, ts2, ta2, tb2, tc2};
        j["derivative_bound"] = bound;
        return j;
      });
    }
  }

  PropertyReport report;
  report.trials = trials;
  report.seed = seed;
  for (LineTracker* t : {&subadd, &product, &homog, &concat, &subcurve, &submono,
                         &adjacency, &changevar, &c1bound})
    report.lines.push_back(t->finish());
  return report;
}

// ---------------------------------------------------------------------------
// Contraction probe

namespace {

// Least-squares envelope v_k ~ plateau - coeff * rho^k over k in [1, n],
// scanning rho on a fixed grid. Bounded means the fitted plateau sits near
// the observed peak with a small residual; a run cut off mid-transient
// extrapolates far past its peak and honestly reports false.
void fit_envelope(ContractionReport& report, int n) {
  report.plateau = report.tail_peak;
  report.fit_rms = 0.0;
  double max_v = 0.0, min_v = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n; ++k) {
    max_v = std::max(max_v, report.variation[size_t(k)]);
    min_v = std::min(min_v, report.variation[size_t(k)]);
  }
  double spread = max_v - min_v;
  if (n < 8 || spread < 1e-12) {
    report.bounded = report.tail_peak <= report.head_peak * 1.05 + 1e-12;
    return;
  }

  double best_sse = std::numeric_limits<double>::infinity();
  double best_plateau = 0.0;
  for (double rho = 0.50; rho <= 0.9951; rho += 0.005) {
    double sx = 0, sxx = 0, sv = 0, sxv = 0;
    double x = 1.0;
    for (int k = 1; k <= n; ++k) {
      x *= rho;
      double v = report.variation[size_t(k)];
      sx += x;
      sxx += x * x;
      sv += v;
      sxv += x * v;
    }
    double m = double(n);
    double denom = sxx - sx * sx / m;
    if (denom < 1e-30) continue;
    double coeff = (sx * sv / m - sxv) / denom;
    double plateau = (sv + coeff * sx) / m;
    double sse = 0;
    x = 1.0;
    for (int k = 1; k <= n; ++k) {
      x *= rho;
      double r = report.variation[size_t(k)] - (plateau - coeff * x);
      sse += r * r;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_plateau = plateau;
    }
  }
  if (!std::isfinite(best_sse)) {
    report.bounded = report.tail_peak <= report.head_peak * 1.05 + 1e-12;
    return;
  }
  report.plateau = best_plateau;
  report.fit_rms = std::sqrt(best_sse / double(n)) / spread;
  report.bounded = report.fit_rms <= 0.15 &&
                   best_plateau <= 1.5 * max_v + 1e-12 && best_plateau >= -1e-12;
}

}  // namespace

ContractionReport variation_sequence(const UlamOperator& op, const DensityVector& f0,
                                     int n, const CurveFamily& family) {
  if (n < 0) throw InvalidArgument("variation_sequence: n must be nonnegative");
  if (f0.values.size() != size_t(op.grid.cells()))
    throw InvalidArgument("variation_sequence: density does not match the grid");

  Region box = Region::rectangle(op.grid.x_lo(), op.grid.x_hi(), op.grid.y_lo(),
                                 op.grid.y_hi());
  ContractionReport report;
  report.variation.reserve(size_t(n) + 1);
  DensityVector current = f0;
  for (int k = 0; k <= n; ++k) {
    GridField field{op.grid, current.values};
    report.variation.push_back(var_lower_bound(field, box, family));
    if (k < n) current = apply(op, current);
  }

  int half = n / 2;
  for (int k = 1; k <= n; ++k) {
    double v = report.variation[size_t(k)];
    if (k <= half)
      report.head_peak = std::max(report.head_peak, v);
    else
      report.tail_peak = std::max(report.tail_peak, v);
  }
  report.growth_ratio =
      report.head_peak > 0.0 ? report.tail_peak / report.head_peak : 0.0;
  fit_envelope(report, n);
  return report;
}

ContractionReport variation_sequence(const UlamOperator& op, const DensityVector& f0,
                                     int n) {
  CurveFamily chords = axis_segment_family(op.grid.x_lo(), op.grid.x_hi(),
                                           op.grid.y_lo(), op.grid.y_hi(), 9);
  return variation_sequence(op, f0, n, chords);
}

namespace {

std::pair<UlamOperator, DensityVector> probe_operator(
    const MapParams& params, const std::function<double(Point2)>& f0, int grid_nx,
    int grid_ny) {
  if (!f0) throw InvalidArgument("contraction_probe: empty initial density");
  RegionDecomposition decomp = decompose_regions(params);
  if (decomp.label == RegionCase::A)
    throw InvalidArgument("contraction_probe: divergent parameter regime");

  UlamOperator op = attractor_ulam(params, grid_nx, grid_ny, 16, 1);
  const Grid& grid = op.grid;

  DensityVector start;
  start.values.resize(size_t(grid.cells()));
  for (int i = 0; i < grid.cells(); ++i) {
    double v = f0(grid.cell_center(i));
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidArgument("contraction_probe: f0 must be finite and nonnegative");
    start.values[size_t(i)] = v;
  }
  double mass = l1_norm(grid, start);
  if (!(mass > 0.0))
    throw InvalidArgument("contraction_probe: f0 must have positive mass");
  for (double& v : start.values) v /= mass;
  return {std::move(op), std::move(start)};
}

}  // namespace

ContractionReport contraction_probe(const MapParams& params,
                                    const std::function<double(Point2)>& f0, int n,
                                    const CurveFamily& family, int grid_nx,
                                    int grid_ny) {
  auto [op, start] = probe_operator(params, f0, grid_nx, grid_ny);
  return variation_sequence(op, start, n, family);
}

ContractionReport contraction_probe(const MapParams& params,
                                    const std::function<double(Point2)>& f0, int n,
                                    int grid_nx, int grid_ny) {
  auto [op, start] = probe_operator(params, f0, grid_nx, grid_ny);
  return variation_sequence(op, start, n);
}

}  // namespace statper
