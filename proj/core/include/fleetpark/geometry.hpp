#pragma once

#include <array>
#include <cmath>

namespace fleetpark {

inline constexpr double kPi = 3.14159265358979323846;

// Overlaps thinner than this count as boundary contact, not area.
inline constexpr double kOverlapEps = 1e-9;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// World pose of a vehicle body center. Heading is the body's longitudinal
/// axis in radians, counter-clockwise from +X.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Axis-aligned rectangle, half-open in spirit: [x_min, x_max) x [y_min, y_max).
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool contains(Vec2 p, double tol = 1e-9) const {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol &&
           p.y <= y_max + tol;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Rectangular vehicle body; length runs along the heading.
struct BodyDims {
  double length = 4.7;
  double width = 2.0;

  bool degenerate() const { return length <= 0.0 || width <= 0.0; }
  friend bool operator==(const BodyDims&, const BodyDims&) = default;
};

/// Oriented rectangle as four corners, counter-clockwise.
using Quad = std::array<Vec2, 4>;

Quad body_corners(const Pose& pose, const BodyDims& body);

/// Axis-aligned bounds of a quad.
Rect bounds_of(const Quad& q);

/// True iff the two convex quads share strictly positive area
/// (separating-axis test; edge or corner contact is not an overlap).
bool quads_overlap(const Quad& a, const Quad& b);

/// Positive-area overlap between an oriented body and an axis-aligned box.
bool quad_overlaps_rect(const Quad& q, const Rect& r);

/// True iff every corner of the quad lies inside r (within tol).
bool quad_inside_rect(const Quad& q, const Rect& r, double tol = 1e-9);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace fleetpark
