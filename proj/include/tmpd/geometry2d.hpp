#pragma once

// Planar primitives, obstacle distance fields and the collision / visibility
// predicates consumed by the rest of the planner.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tmpd/errors.hpp"

namespace tmpd {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2 &operator+=(Point2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Point2 &operator-=(Point2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Point2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }
constexpr Point2 lerp(Point2 a, Point2 b, double s) { return a + s * (b - a); }

/// Closest point to `p` on segment [a, b].
inline Point2 closest_on_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return a;
  const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + s * ab;
}

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  return distance(p, closest_on_segment(p, a, b));
}

struct Circle {
  Point2 center;
  double radius = 0.0;
};

/// Axis-aligned box.
struct Box {
  Point2 center;
  Point2 half_extents;
};

struct Obstacle {
  std::variant<Circle, Box> shape;
  int id = 0;

  /// Reference point used for winding numbers (geometric center for both shapes).
  Point2 center() const {
    return std::visit([](const auto &s) { return s.center; }, shape);
  }
  bool is_circle() const { return std::holds_alternative<Circle>(shape); }
};

struct Rect {
  Point2 min{-1.0, -1.0};
  Point2 max{1.0, 1.0};

  bool contains(Point2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

// ---------------------------------------------------------------------------
// Per-shape distance fields

inline double signed_distance(const Circle &c, Point2 p) { return distance(p, c.center) - c.radius; }

inline double signed_distance(const Box &b, Point2 p) {
  const double qx = std::abs(p.x - b.center.x) - b.half_extents.x;
  const double qy = std::abs(p.y - b.center.y) - b.half_extents.y;
  const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
  return outside + std::min(std::max(qx, qy), 0.0);
}

/// Unit outward normal of the distance field. At the singular points (circle
/// center, equidistant box interior) the +x face wins ties.
inline Point2 distance_gradient(const Circle &c, Point2 p) {
  const Point2 d = p - c.center;
  const double n = norm(d);
  if (n == 0.0) return {1.0, 0.0};
  return (1.0 / n) * d;
}

inline Point2 distance_gradient(const Box &b, Point2 p) {
  const double dx = p.x - b.center.x;
  const double dy = p.y - b.center.y;
  const double sx = dx < 0.0 ? -1.0 : 1.0;
  const double sy = dy < 0.0 ? -1.0 : 1.0;
  const double qx = std::abs(dx) - b.half_extents.x;
  const double qy = std::abs(dy) - b.half_extents.y;
  if (qx > 0.0 || qy > 0.0) {
    const Point2 o{sx * std::max(qx, 0.0), sy * std::max(qy, 0.0)};
    return (1.0 / norm(o)) * o;
  }
  if (qx >= qy) return {sx, 0.0};
  return {0.0, sy};
}

inline bool segment_intersects_box(Point2 a, Point2 b, const Box &box) {
  // Liang-Barsky slab clipping.
  double t0 = 0.0;
  double t1 = 1.0;
  const Point2 d = b - a;
  const double lo[2] = {box.center.x - box.half_extents.x, box.center.y - box.half_extents.y};
  const double hi[2] = {box.center.x + box.half_extents.x, box.center.y + box.half_extents.y};
  const double p0[2] = {a.x, a.y};
  const double dd[2] = {d.x, d.y};
  for (int k = 0; k < 2; ++k) {
    if (dd[k] == 0.0) {
      if (p0[k] < lo[k] || p0[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - p0[k]) / dd[k];
    double tb = (hi[k] - p0[k]) / dd[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

inline std::array<Point2, 4> corners(const Box &b) {
  const Point2 c = b.center;
  const Point2 h = b.half_extents;
  return {Point2{c.x - h.x, c.y - h.y}, Point2{c.x + h.x, c.y - h.y}, Point2{c.x + h.x, c.y + h.y},
          Point2{c.x - h.x, c.y + h.y}};
}

/// Minimum of the shape's signed distance field over segment [a, b].
inline double segment_min_distance(const Circle &c, Point2 a, Point2 b) {
  return point_segment_distance(c.center, a, b) - c.radius;
}

inline double segment_min_distance(const Box &box, Point2 a, Point2 b) {
  if (segment_intersects_box(a, b, box)) {
    // Only the sign matters to callers once the segment enters the box.
    const Point2 c = closest_on_segment(box.center, a, b);
    return std::min(signed_distance(box, c), 0.0);
  }
  double best = std::min(signed_distance(box, a), signed_distance(box, b));
  for (Point2 k : corners(box)) best = std::min(best, point_segment_distance(k, a, b));
  return best;
}

// ---------------------------------------------------------------------------
// Environment

class Environment {
public:
  Environment() = default;

  explicit Environment(Rect bounds, std::vector<Obstacle> obstacles = {})
      : bounds_(bounds), obstacles_(std::move(obstacles)) {
    if (!(bounds_.max.x > bounds_.min.x && bounds_.max.y > bounds_.min.y))
      throw InvalidArgument("environment bounds are empty");
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      Obstacle &o = obstacles_[i];
      o.id = static_cast<int>(i);
      const bool ok = std::visit(
          [&](const auto &s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Circle>) {
              return s.radius > 0.0 && s.center.x - s.radius >= bounds_.min.x &&
                     s.center.x + s.radius <= bounds_.max.x && s.center.y - s.radius >= bounds_.min.y &&
                     s.center.y + s.radius <= bounds_.max.y;
            } else {
              return s.half_extents.x > 0.0 && s.half_extents.y > 0.0 &&
                     s.center.x - s.half_extents.x >= bounds_.min.x &&
                     s.center.x + s.half_extents.x <= bounds_.max.x &&
                     s.center.y - s.half_extents.y >= bounds_.min.y &&
                     s.center.y + s.half_extents.y <= bounds_.max.y;
            }
          },
          o.shape);
      if (!ok) throw InvalidArgument("obstacle " + std::to_string(i) + " is degenerate or outside bounds");
    }
  }

  const Rect &bounds() const { return bounds_; }
  std::span<const Obstacle> obstacles() const { return obstacles_; }
  std::size_t size() const { return obstacles_.size(); }
  bool empty() const { return obstacles_.empty(); }

  std::vector<Point2> centers() const {
    std::vector<Point2> out;
    out.reserve(obstacles_.size());
    for (const auto &o : obstacles_) out.push_back(o.center());
    return out;
  }

private:
  Rect bounds_{};
  std::vector<Obstacle> obstacles_;
};

inline double signed_distance(const Obstacle &o, Point2 p) {
  return std::visit([&](const auto &s) { return signed_distance(s, p); }, o.shape);
}

/// Minimum signed distance to any obstacle; +infinity in an empty environment.
inline double signed_distance(const Environment &env, Point2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &o : env.obstacles()) best = std::min(best, signed_distance(o, p));
  return best;
}

struct DistanceSample {
  double distance = std::numeric_limits<double>::infinity();
  Point2 gradient{};
  int obstacle = -1;
};

/// Distance together with the gradient of the closest obstacle's field.
inline DistanceSample signed_distance_with_gradient(const Environment &env, Point2 p) {
  DistanceSample s;
  for (const auto &o : env.obstacles()) {
    const double d = signed_distance(o, p);
    if (d < s.distance) {
      s.distance = d;
      s.obstacle = o.id;
    }
  }
  if (s.obstacle >= 0) {
    s.gradient = std::visit([&](const auto &sh) { return distance_gradient(sh, p); },
                            env.obstacles()[static_cast<std::size_t>(s.obstacle)].shape);
  }
  return s;
}

inline double segment_min_distance(const Obstacle &o, Point2 a, Point2 b) {
  return std::visit([&](const auto &s) { return segment_min_distance(s, a, b); }, o.shape);
}

/// True iff both endpoints lie in the workspace and the segment keeps a
/// clearance strictly greater than `robot_radius` from every obstacle.
inline bool segment_collision_free(const Environment &env, Point2 a, Point2 b, double robot_radius) {
  if (!env.bounds().contains(a) || !env.bounds().contains(b)) return false;
  for (const auto &o : env.obstacles()) {
    if (segment_min_distance(o, a, b) <= robot_radius) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Trajectory

class Trajectory {
public:
  Trajectory() = default;

  /// Drops consecutive exact duplicates; at least two distinct waypoints must remain.
  explicit Trajectory(std::vector<Point2> waypoints) {
    pts_.reserve(waypoints.size());
    for (Point2 p : waypoints) {
      if (!is_finite(p)) throw InvalidArgument("trajectory waypoint is not finite");
      if (pts_.empty() || !(pts_.back() == p)) pts_.push_back(p);
    }
    if (pts_.size() < 2) throw InvalidArgument("trajectory needs at least two distinct waypoints");
  }

  Trajectory(std::initializer_list<Point2> waypoints) : Trajectory(std::vector<Point2>(waypoints)) {}

  std::span<const Point2> waypoints() const { return pts_; }
  const std::vector<Point2> &points() const { return pts_; }
  std::size_t size() const { return pts_.size(); }
  Point2 front() const { return pts_.front(); }
  Point2 back() const { return pts_.back(); }
  Point2 operator[](std::size_t i) const { return pts_[i]; }

  double length() const {
    double l = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) l += distance(pts_[i - 1], pts_[i]);
    return l;
  }

  Trajectory reversed() const {
    std::vector<Point2> r(pts_.rbegin(), pts_.rend());
    return Trajectory(std::move(r));
  }

  friend bool operator==(const Trajectory &, const Trajectory &) = default;

private:
  std::vector<Point2> pts_;
};

inline double path_length(std::span<const Point2> pts) {
  double l = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) l += distance(pts[i - 1], pts[i]);
  return l;
}

/// `a ⊕ b`: requires a.back() == b.front(); the shared junction appears once.
inline Trajectory concatenate(const Trajectory &a, const Trajectory &b) {
  if (!(a.back() == b.front())) throw EndpointMismatch("concatenation junction does not match");
  std::vector<Point2> pts(a.points());
  pts.insert(pts.end(), b.points().begin() + 1, b.points().end());
  return Trajectory(std::move(pts));
}

inline bool trajectory_collision_free(const Environment &env, const Trajectory &tau, double robot_radius) {
  const auto &p = tau.points();
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!segment_collision_free(env, p[i - 1], p[i], robot_radius)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Triangle predicates used by curve shortening

/// Point inside or on the boundary of triangle abc (either orientation).
inline bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c) {
  const double area = cross(b - a, c - a);
  if (area == 0.0) {
    // Degenerate triangle: its closure is the union of its edges.
    const double tol = 1e-12;
    return point_segment_distance(p, a, b) <= tol || point_segment_distance(p, b, c) <= tol ||
           point_segment_distance(p, a, c) <= tol;
  }
  const double d1 = cross(b - a, p - a);
  const double d2 = cross(c - b, p - b);
  const double d3 = cross(a - c, p - c);
  if (area > 0.0) return d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0;
  return d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0;
}

namespace detail {

inline double triangle_distance(Point2 p, Point2 a, Point2 b, Point2 c) {
  if (point_in_triangle(p, a, b, c)) return 0.0;
  return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                   point_segment_distance(p, c, a)});
}

inline bool overlaps_interior(const Circle &s, Point2 a, Point2 b, Point2 c) {
  if (cross(b - a, c - a) == 0.0) return false;
  return triangle_distance(s.center, a, b, c) < s.radius;
}

inline bool overlaps_interior(const Box &s, Point2 a, Point2 b, Point2 c) {
  if (cross(b - a, c - a) == 0.0) return false;
  // Separating axis test, touching counts as separated.
  const std::array<Point2, 3> tri{a, b, c};
  const auto box = corners(s);
  std::array<Point2, 5> axes{Point2{1.0, 0.0}, Point2{0.0, 1.0}, Point2{-(b - a).y, (b - a).x},
                             Point2{-(c - b).y, (c - b).x}, Point2{-(a - c).y, (a - c).x}};
  for (Point2 ax : axes) {
    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
    double bmin = tmin, bmax = -tmin;
    for (Point2 p : tri) {
      tmin = std::min(tmin, dot(p, ax));
      tmax = std::max(tmax, dot(p, ax));
    }
    for (Point2 p : box) {
      bmin = std::min(bmin, dot(p, ax));
      bmax = std::max(bmax, dot(p, ax));
    }
    if (tmax <= bmin || bmax <= tmin) return false;
  }
  return true;
}

} // namespace detail

/// True iff no obstacle reference center lies in the closed triangle abc and no
/// obstacle overlaps the triangle's interior.
inline bool triangle_free(const Environment &env, Point2 a, Point2 b, Point2 c) {
  const double minx = std::min({a.x, b.x, c.x}), maxx = std::max({a.x, b.x, c.x});
  const double miny = std::min({a.y, b.y, c.y}), maxy = std::max({a.y, b.y, c.y});
  for (const auto &o : env.obstacles()) {
    const bool hit = std::visit(
        [&](const auto &s) {
          using S = std::decay_t<decltype(s)>;
          Point2 ext;
          if constexpr (std::is_same_v<S, Circle>)
            ext = {s.radius, s.radius};
          else
            ext = s.half_extents;
          if (s.center.x + ext.x < minx || s.center.x - ext.x > maxx || s.center.y + ext.y < miny ||
              s.center.y - ext.y > maxy)
            return false;
          return point_in_triangle(s.center, a, b, c) || detail::overlaps_interior(s, a, b, c);
        },
        o.shape);
    if (hit) return false;
  }
  return true;
}

} // namespace tmpd
