#include "statper/maps.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace statper {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(Point2 v, const char* op) {
  if (!is_finite(v)) {
    throw InvalidArgument(std::string(op) + ": non-finite input point");
  }
}

void require_finite(double x, const char* op) {
  if (!std::isfinite(x)) {
    throw InvalidArgument(std::string(op) + ": non-finite input");
  }
}

}  // namespace

MapParams::MapParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw InvalidArgument("MapParams: parameters must be finite");
  }
  if (!(beta > 1.0 && beta <= 2.0)) {
    throw InvalidArgument("MapParams: beta must lie in (1, 2], got " + std::to_string(beta));
  }
}

double tent(double x, const MapParams& p) {
  require_finite(x, "tent");
  return x < 0.0 ? p.beta * x + p.beta + 1.0 : -p.beta * x + p.beta + 1.0;
}

double hat_map(double x, double slope) {
  require_finite(x, "hat_map");
  if (!(slope > 1.0 && slope <= 2.0)) {
    throw InvalidArgument("hat_map: slope must lie in (1, 2]");
  }
  if (x < 0.0 || x > 1.0) {
    throw InvalidArgument("hat_map: x must lie in [0, 1]");
  }
  return x <= 0.5 ? slope * x : slope * (1.0 - x);
}

Point2 delay_map(Point2 v, const MapParams& p) {
  require_finite(v, "delay_map");
  return {v.y, p.alpha * v.y + tent(v.x, p)};
}

Point2 switched_map(Point2 v, const MapParams& p) {
  require_finite(v, "switched_map");
  double sx = p.alpha * v.x + v.y + 1.0;
  double sy = v.x < 0.0 ? p.beta * v.x : -p.beta * v.x;
  return {sx, sy};
}

Point2 to_switched_coords(Point2 v, const MapParams& p) {
  require_finite(v, "to_switched_coords");
  double s = p.beta + 1.0;
  double second = v.x < 0.0 ? p.beta * v.x : -p.beta * v.x;
  return {v.y / s, second / s};
}

double delay_step(double x_prev, double x_curr, const MapParams& p) {
  require_finite(x_prev, "delay_step");
  require_finite(x_curr, "delay_step");
  return p.alpha * x_curr + tent(x_prev, p);
}

Point2 anisotropic_mod_map(Point2 v) {
  require_finite(v, "anisotropic_mod_map");
  if (v.x < 0.0 || v.x >= 1.0 || v.y < 0.0 || v.y >= 1.0) {
    throw InvalidArgument("anisotropic_mod_map: point must lie in [0,1)^2");
  }
  double x = 4.0 * v.x;
  x -= std::floor(x);
  return {x, 0.5 * v.y};
}

Point2 PiecewiseMap2D::operator()(Point2 v) const {
  return branch_at(v.x).forward(v);
}

const Branch& PiecewiseMap2D::branch_at(double x) const {
  for (const Branch& br : branches) {
    if (br.contains(x)) return br;
  }
  throw InvalidArgument("PiecewiseMap2D: no branch covers x = " + std::to_string(x));
}

PiecewiseMap2D make_switched_map(const MapParams& p) {
  PiecewiseMap2D m;
  // Left strip: (x, y) -> (alpha*x + y + 1, beta*x).
  Branch left;
  left.id = BranchId::Left;
  left.x_lo = -kInf;
  left.x_hi = 0.0;
  left.forward = {{p.alpha, 1.0, p.beta, 0.0}, {1.0, 0.0}};
  left.inverse = {{0.0, 1.0 / p.beta, 1.0, -p.alpha / p.beta}, {0.0, -1.0}};
  // Right strip: (x, y) -> (alpha*x + y + 1, -beta*x).
  Branch right;
  right.id = BranchId::Right;
  right.x_lo = 0.0;
  right.x_hi = kInf;
  right.forward = {{p.alpha, 1.0, -p.beta, 0.0}, {1.0, 0.0}};
  right.inverse = {{0.0, -1.0 / p.beta, 1.0, p.alpha / p.beta}, {0.0, -1.0}};
  m.branches = {left, right};
  return m;
}

PiecewiseMap2D make_delay_map(const MapParams& p) {
  PiecewiseMap2D m;
  double peak = p.beta + 1.0;
  // (x, y) -> (y, alpha*y + tent(x)); the tent contributes the only branching.
  Branch left;
  left.id = BranchId::Left;
  left.x_lo = -kInf;
  left.x_hi = 0.0;
  left.forward = {{0.0, 1.0, p.beta, p.alpha}, {0.0, peak}};
  left.inverse = {{-p.alpha / p.beta, 1.0 / p.beta, 1.0, 0.0}, {-peak / p.beta, 0.0}};
  Branch right;
  right.id = BranchId::Right;
  right.x_lo = 0.0;
  right.x_hi = kInf;
  right.forward = {{0.0, 1.0, -p.beta, p.alpha}, {0.0, peak}};
  right.inverse = {{p.alpha / p.beta, -1.0 / p.beta, 1.0, 0.0}, {peak / p.beta, 0.0}};
  m.branches = {left, right};
  return m;
}

PiecewiseMap2D make_anisotropic_mod_map() {
  PiecewiseMap2D m;
  for (int k = 0; k < 4; ++k) {
    Branch br;
    br.id = BranchId::Right;
    br.x_lo = 0.25 * k;
    br.x_hi = 0.25 * (k + 1);
    br.forward = {{4.0, 0.0, 0.0, 0.5}, {-double(k), 0.0}};
    br.inverse = {{0.25, 0.0, 0.0, 2.0}, {0.25 * k, 0.0}};
    m.branches.push_back(br);
  }
  return m;
}

Stability classify_stability(std::complex<double> e1, std::complex<double> e2) {
  constexpr double kTol = 1e-12;
  if (std::fabs(e1.imag()) > kTol || std::fabs(e2.imag()) > kTol) {
    double re = e1.real();
    if (re > kTol) return Stability::UnstableFocus;
    if (re < -kTol) return Stability::StableFocus;
    return Stability::Center;
  }
  double m1 = std::fabs(e1.real());
  double m2 = std::fabs(e2.real());
  if (std::fabs(m1 - m2) <= kTol) return Stability::Degenerate;  // repeated root
  double hi = std::max(m1, m2);
  double lo = std::min(m1, m2);
  if (std::fabs(hi - 1.0) <= kTol || std::fabs(lo - 1.0) <= kTol) return Stability::Degenerate;
  if (hi > 1.0 && lo > 1.0) return Stability::UnstableNode;
  if (hi > 1.0 && lo < 1.0) return Stability::Saddle;
  return Stability::Degenerate;  // both inside: unreachable for this family
}

std::vector<FixedPointReport> fixed_points(const MapParams& p) {
  std::vector<FixedPointReport> out;
  if (p.has_left_fixed()) {
    double den = 1.0 - p.alpha - p.beta;
    FixedPointReport r;
    r.side = BranchId::Left;
    r.location = {1.0 / den, p.beta / den};
    double disc = p.alpha * p.alpha + 4.0 * p.beta;  // always positive
    double root = std::sqrt(disc);
    r.eig_plus = {0.5 * (p.alpha + root), 0.0};
    r.eig_minus = {0.5 * (p.alpha - root), 0.0};
    r.stability = classify_stability(r.eig_plus, r.eig_minus);
    out.push_back(r);
  }
  if (p.has_right_fixed()) {
    double den = 1.0 - p.alpha + p.beta;
    FixedPointReport r;
    r.side = BranchId::Right;
    r.location = {1.0 / den, -p.beta / den};
    double disc = p.alpha * p.alpha - 4.0 * p.beta;
    if (disc < 0.0) {
      double im = 0.5 * std::sqrt(-disc);
      r.eig_plus = {0.5 * p.alpha, im};
      r.eig_minus = {0.5 * p.alpha, -im};
    } else {
      double root = std::sqrt(disc);
      r.eig_plus = {0.5 * (p.alpha + root), 0.0};
      r.eig_minus = {0.5 * (p.alpha - root), 0.0};
    }
    r.stability = classify_stability(r.eig_plus, r.eig_minus);
    out.push_back(r);
  }
  return out;
}

Affine2 right_branch_inverse(const MapParams& p) {
  return {{0.0, -1.0 / p.beta, 1.0, p.alpha / p.beta}, {0.0, -1.0}};
}

namespace {

void require_complex_regime(const MapParams& p, const char* op) {
  if (!p.complex_right_pair()) {
    throw InvalidArgument(std::string(op) +
                          ": requires alpha^2 < 4*beta (complex eigenvalue pair)");
  }
}

}  // namespace

// Powers of the 2x2 inverse matrix A satisfy A^n = u_n*A - det(A)*u_{n-1}*I
// where u_{k+1} = trace(A)*u_k - det(A)*u_{k-1}, u_0 = 0, u_1 = 1. Both
// fundamental solutions decay (|eig| = 1/sqrt(beta) < 1), so the forward
// recurrence is stable.
Mat2 right_inverse_power(int n, const MapParams& p) {
  if (n < 0) throw InvalidArgument("right_inverse_power: n must be >= 0");
  require_complex_regime(p, "right_inverse_power");
  Mat2 A = right_branch_inverse(p).m;
  if (n == 0) return Mat2::identity();
  double t = A.trace();
  double d = A.det();
  double u_prev = 0.0, u = 1.0;  // u_{n-1}, u_n starting at n = 1
  for (int k = 1; k < n; ++k) {
    double next = t * u - d * u_prev;
    u_prev = u;
    u = next;
  }
  return A.scaled(u) - Mat2::identity().scaled(d * u_prev);
}

Mat2 right_inverse_geometric_sum(int n, const MapParams& p) {
  if (n < 0) throw InvalidArgument("right_inverse_geometric_sum: n must be >= 0");
  require_complex_regime(p, "right_inverse_geometric_sum");
  Mat2 A = right_branch_inverse(p).m;
  double t = A.trace();
  double d = A.det();
  // Sum over k of A^k = (sum u_k)*A - det*(sum u_{k-1})*I, accumulated as we go.
  double u_prev = 0.0, u = 1.0;
  double sum_u = 0.0, sum_u_prev = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      sum_u += u;
      sum_u_prev += u_prev;
      double next = t * u - d * u_prev;
      u_prev = u;
      u = next;
    }
  }
  Mat2 acc = A.scaled(sum_u) - Mat2::identity().scaled(d * sum_u_prev);
  if (n > 0) acc = acc + Mat2::identity();  // the A^0 term
  return acc;
}

}  // namespace statper
