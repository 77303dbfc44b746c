#pragma once

#include <cmath>

namespace statper {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Row-major 2x2 matrix.
struct Mat2 {
  double a = 1.0, b = 0.0;  // [a b]
  double c = 0.0, d = 1.0;  // [c d]

  static Mat2 identity() { return {}; }

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }

  Point2 operator*(Point2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }

  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }

  Mat2 scaled(double s) const { return {s * a, s * b, s * c, s * d}; }

  double max_abs_diff(const Mat2& o) const {
    double m = std::fabs(a - o.a);
    m = std::max(m, std::fabs(b - o.b));
    m = std::max(m, std::fabs(c - o.c));
    m = std::max(m, std::fabs(d - o.d));
    return m;
  }
};

// Affine map v -> m*v + t.
struct Affine2 {
  Mat2 m;
  Point2 t;

  Point2 operator()(Point2 v) const {
    Point2 w = m * v;
    return {w.x + t.x, w.y + t.y};
  }
};

}  // namespace statper
