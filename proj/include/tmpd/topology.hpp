#pragma once

// Winding-number calculus, homotopy signatures, curve shortening (taut
// configuration) and the quadratic topological energy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tmpd/errors.hpp"
#include "tmpd/geometry2d.hpp"

namespace tmpd {

inline constexpr double kCenterEpsilon = 1e-9;
inline constexpr double kIntegerSnapTolerance = 0.05;

/// Per-obstacle winding in turns, indexed by obstacle id.
struct WindingVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  WindingVector &operator+=(const WindingVector &o) {
    if (o.size() != size()) throw InvalidArgument("winding vector size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  friend WindingVector operator+(WindingVector a, const WindingVector &b) { return a += b; }
  friend WindingVector operator-(WindingVector a, const WindingVector &b) {
    if (a.size() != b.size()) throw InvalidArgument("winding vector size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.values[i] -= b.values[i];
    return a;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Signed integer loop count per obstacle relative to a reference path.
struct HomotopySignature {
  std::vector<int> loops;

  bool is_zero() const {
    return std::all_of(loops.begin(), loops.end(), [](int v) { return v == 0; });
  }
  friend bool operator==(const HomotopySignature &, const HomotopySignature &) = default;
  friend auto operator<=>(const HomotopySignature &, const HomotopySignature &) = default;
};

/// Signed angle (radians, in (-pi, pi]) that segment [a, b] subtends at `center`.
inline double subtended_angle(Point2 a, Point2 b, Point2 center) {
  if (point_segment_distance(center, a, b) <= kCenterEpsilon)
    throw CenterOnCurve("winding reference point lies on the curve");
  const Point2 u = a - center;
  const Point2 v = b - center;
  return std::atan2(cross(u, v), dot(u, v));
}

/// Generalized winding number of a polyline about `center`, in turns (CCW positive).
inline double winding_number(std::span<const Point2> pts, Point2 center) {
  double sum = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) sum += subtended_angle(pts[i - 1], pts[i], center);
  return sum / (2.0 * std::numbers::pi);
}

inline double winding_number(const Trajectory &tau, Point2 center) {
  return winding_number(tau.waypoints(), center);
}

inline WindingVector winding_vector(std::span<const Point2> pts, const Environment &env) {
  WindingVector w;
  w.values.reserve(env.size());
  for (const auto &o : env.obstacles()) w.values.push_back(winding_number(pts, o.center()));
  return w;
}

inline WindingVector winding_vector(const Trajectory &tau, const Environment &env) {
  return winding_vector(tau.waypoints(), env);
}

/// Integer loop count of `tau` relative to `ref` about each obstacle center.
inline HomotopySignature homotopy_signature(std::span<const Point2> tau, std::span<const Point2> ref,
                                            const Environment &env) {
  if (tau.size() < 2 || ref.size() < 2 || !(tau.front() == ref.front()) || !(tau.back() == ref.back()))
    throw EndpointMismatch("homotopy signature requires identical endpoints");
  HomotopySignature sig;
  sig.loops.reserve(env.size());
  for (const auto &o : env.obstacles()) {
    const double d = winding_number(tau, o.center()) - winding_number(ref, o.center());
    const double r = std::round(d);
    if (std::abs(d - r) > kIntegerSnapTolerance)
      throw NonIntegerLoop("loop winding " + std::to_string(d) + " about obstacle " + std::to_string(o.id));
    sig.loops.push_back(static_cast<int>(r));
  }
  return sig;
}

inline HomotopySignature homotopy_signature(const Trajectory &tau, const Trajectory &ref,
                                            const Environment &env) {
  return homotopy_signature(tau.waypoints(), ref.waypoints(), env);
}

/// J_topo = sum_j alpha * W_j^2.
inline double topological_energy(const WindingVector &w, double alpha) {
  double e = 0.0;
  for (double v : w.values) e += alpha * v * v;
  return e;
}

inline double topological_energy(const Trajectory &global, const Environment &env, double alpha) {
  return topological_energy(winding_vector(global, env), alpha);
}

/// Largest |W| over obstacles; 0 for an empty environment.
inline double max_abs_winding(const Trajectory &tau, const Environment &env) {
  return winding_vector(tau, env).max_abs();
}

// ---------------------------------------------------------------------------
// Curve shortening

struct TautOptions {
  int max_sweeps = 50;
  /// Segments shorter than twice this are never subdivided.
  double min_segment = 0.004;
  /// A refinement sweep must shorten the path by more than this (meters).
  double improvement_tol = 1e-7;
  int bisection_steps = 12;
};

struct TautStats {
  int sweeps = 0;
  bool hit_cap = false;
};

namespace detail {

// Removes q_i whenever the shortcut q_{i-1} q_{i+1} is clear and the pruned
// triangle is free; repeats until nothing more can be removed.
inline std::vector<Point2> prune_visible(std::vector<Point2> pts, const Environment &env, double r) {
  bool changed = true;
  while (changed && pts.size() > 2) {
    changed = false;
    std::vector<Point2> out;
    out.reserve(pts.size());
    out.push_back(pts.front());
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const Point2 a = out.back();
      const Point2 v = pts[i];
      const Point2 b = pts[i + 1];
      if (segment_collision_free(env, a, b, r) && triangle_free(env, a, v, b)) {
        changed = true;
        continue;
      }
      out.push_back(v);
    }
    out.push_back(pts.back());
    pts = std::move(out);
  }
  return pts;
}

inline bool relax_feasible(const Environment &env, double r, Point2 a, Point2 v, Point2 b, Point2 q) {
  return segment_collision_free(env, a, q, r) && segment_collision_free(env, q, b, r) &&
         triangle_free(env, a, v, q) && triangle_free(env, v, b, q);
}

// Largest feasible fraction of the move v -> target, by bisection.
inline double feasible_fraction(const Environment &env, double r, Point2 a, Point2 v, Point2 b, Point2 target,
                                int bisection_steps) {
  if (relax_feasible(env, r, a, v, b, target)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < bisection_steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (relax_feasible(env, r, a, v, b, lerp(v, target, mid)))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// Pulls each interior vertex toward the chord of its neighbours as far as the
// clearance and the swept-region test allow (Gauss-Seidel order). A vertex
// whose outgoing segment grazes an obstacle cannot move toward the chord at
// all; it slides along one of its own segments instead, which also shortens
// the path.
inline void relax(std::vector<Point2> &pts, const Environment &env, double r, int bisection_steps) {
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Point2 a = pts[i - 1];
    const Point2 v = pts[i];
    const Point2 b = pts[i + 1];
    const Point2 target = closest_on_segment(v, a, b);
    if (distance(v, target) < 1e-12) continue;
    const double f = feasible_fraction(env, r, a, v, b, target, bisection_steps);
    if (f > 0.0) {
      pts[i] = lerp(v, target, f);
      continue;
    }
    for (Point2 end : {b, a}) {
      const double g = feasible_fraction(env, r, a, v, b, lerp(v, end, 0.5), bisection_steps);
      if (g > 0.0) {
        pts[i] = lerp(v, end, 0.5 * g);
        break;
      }
    }
  }
}

inline std::vector<Point2> subdivide(const std::vector<Point2> &pts, double min_segment) {
  std::vector<Point2> out;
  out.reserve(2 * pts.size());
  out.push_back(pts.front());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (distance(pts[i - 1], pts[i]) > 2.0 * min_segment) out.push_back(lerp(pts[i - 1], pts[i], 0.5));
    out.push_back(pts[i]);
  }
  return out;
}

} // namespace detail

/// Shortest path homotopic to `tau` (the configuration a tensioned cable
/// would settle into), approximated by visibility pruning plus vertex
/// relaxation. Endpoints are kept; the result never gets longer.
inline Trajectory taut_configuration(const Trajectory &tau, const Environment &env, double robot_radius,
                                     const TautOptions &opt = {}, TautStats *stats = nullptr) {
  if (!trajectory_collision_free(env, tau, robot_radius))
    throw InputInCollision("curve shortening input is not collision-free");
  std::vector<Point2> pts = detail::prune_visible(tau.points(), env, robot_radius);
  double len = path_length(pts);
  int sweep = 0;
  bool capped = true;
  for (; sweep < opt.max_sweeps; ++sweep) {
    std::vector<Point2> cand = detail::subdivide(pts, opt.min_segment);
    detail::relax(cand, env, robot_radius, opt.bisection_steps);
    cand = detail::prune_visible(std::move(cand), env, robot_radius);
    const double cand_len = path_length(cand);
    if (!(cand_len < len - opt.improvement_tol)) {
      capped = false;
      break;
    }
    pts = std::move(cand);
    len = cand_len;
  }
  if (capped) std::clog << "tmpd: curve shortening stopped at the sweep cap (" << opt.max_sweeps << ")\n";
  if (stats) {
    stats->sweeps = sweep;
    stats->hit_cap = capped;
  }
  return Trajectory(std::move(pts));
}

} // namespace tmpd
