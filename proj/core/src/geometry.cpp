#include "fleetpark/geometry.hpp"

#include <algorithm>
#include <limits>

namespace fleetpark {

Quad body_corners(const Pose& pose, const BodyDims& body) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double hl = 0.5 * body.length;
  const double hw = 0.5 * body.width;
  const Vec2 ax{c * hl, s * hl};
  const Vec2 ay{-s * hw, c * hw};
  const Vec2 p = pose.position();
  return {p + ax - ay, p + ax + ay, p - ax + ay, p - ax - ay};
}

Rect bounds_of(const Quad& q) {
  Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& p : q) {
    r.x_min = std::min(r.x_min, p.x);
    r.y_min = std::min(r.y_min, p.y);
    r.x_max = std::max(r.x_max, p.x);
    r.y_max = std::max(r.y_max, p.y);
  }
  return r;
}

namespace {

struct Interval {
  double lo;
  double hi;
};

Interval project(const Quad& q, Vec2 axis) {
  Interval out{dot(q[0], axis), dot(q[0], axis)};
  for (int k = 1; k < 4; ++k) {
    const double v = dot(q[k], axis);
    out.lo = std::min(out.lo, v);
    out.hi = std::max(out.hi, v);
  }
  return out;
}

// Axes are normalized so the overlap depth is in meters.
bool separated_on(const Quad& a, const Quad& b, Vec2 axis) {
  const double n = norm(axis);
  if (n == 0.0) {
    return false;
  }
  axis = (1.0 / n) * axis;
  const Interval ia = project(a, axis);
  const Interval ib = project(b, axis);
  return std::min(ia.hi, ib.hi) - std::max(ia.lo, ib.lo) <= kOverlapEps;
}

}  // namespace

bool quads_overlap(const Quad& a, const Quad& b) {
  for (const Quad* q : {&a, &b}) {
    for (int k = 0; k < 2; ++k) {
      const Vec2 edge = (*q)[k + 1] - (*q)[k];
      if (separated_on(a, b, Vec2{-edge.y, edge.x})) {
        return false;
      }
    }
  }
  return true;
}

bool quad_overlaps_rect(const Quad& q, const Rect& r) {
  const Quad box{Vec2{r.x_min, r.y_min}, Vec2{r.x_max, r.y_min}, Vec2{r.x_max, r.y_max},
                 Vec2{r.x_min, r.y_max}};
  return quads_overlap(q, box);
}

bool quad_inside_rect(const Quad& q, const Rect& r, double tol) {
  return std::all_of(q.begin(), q.end(), [&](Vec2 p) { return r.contains(p, tol); });
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) {
    a += 2.0 * kPi;
  }
  return a - kPi;
}

}  // namespace fleetpark
