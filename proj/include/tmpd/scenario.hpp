#pragma once

// Seeded workspace and mission generation for experiments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tmpd/errors.hpp"
#include "tmpd/geometry2d.hpp"
#include "tmpd/random.hpp"

namespace tmpd {

struct EnvGenConfig {
  int n_spheres_max = 12;
  double sphere_radius_min = 0.08;
  double sphere_radius_max = 0.11;
  int n_boxes_max = 12;
  double box_edge_min = 0.15;
  double box_edge_max = 0.18;
  /// Boundary-to-boundary clearance between any two obstacles.
  double min_clearance = 0.3;
  /// Clearance kept between obstacles and the workspace walls.
  double wall_clearance = 0.15;
  Rect bounds{{-1.0, -1.0}, {1.0, 1.0}};
  /// Each placed obstacle is dropped with this probability (topology variation).
  double removal_probability = 0.2;
  int max_attempts = 10000;

  void validate() const {
    if (n_spheres_max < 0 || n_boxes_max < 0) throw InvalidArgument("obstacle counts must be non-negative");
    if (!(sphere_radius_min > 0.0 && sphere_radius_min <= sphere_radius_max))
      throw InvalidArgument("sphere radius range must be ordered and positive");
    if (!(box_edge_min > 0.0 && box_edge_min <= box_edge_max))
      throw InvalidArgument("box edge range must be ordered and positive");
    if (!(min_clearance > 0.0)) throw InvalidArgument("min_clearance must be positive");
    if (wall_clearance < 0.0) throw InvalidArgument("wall_clearance must be non-negative");
    if (!(removal_probability >= 0.0 && removal_probability <= 1.0))
      throw InvalidArgument("removal_probability must lie in [0, 1]");
    if (!(bounds.max.x > bounds.min.x && bounds.max.y > bounds.min.y)) throw InvalidArgument("empty bounds");
  }
};

/// Boundary-to-boundary distance between two obstacles (<= 0 when they overlap).
inline double obstacle_clearance(const Obstacle &a, const Obstacle &b) {
  const auto half = [](const Obstacle &o) {
    if (const auto *c = std::get_if<Circle>(&o.shape)) return Point2{c->radius, c->radius};
    return std::get<Box>(o.shape).half_extents;
  };
  const Circle *ca = std::get_if<Circle>(&a.shape);
  const Circle *cb = std::get_if<Circle>(&b.shape);
  if (ca && cb) return distance(ca->center, cb->center) - ca->radius - cb->radius;
  if (ca) return signed_distance(std::get<Box>(b.shape), ca->center) - ca->radius;
  if (cb) return signed_distance(std::get<Box>(a.shape), cb->center) - cb->radius;
  const Point2 ha = half(a), hb = half(b);
  const Point2 d = a.center() - b.center();
  const double gx = std::abs(d.x) - ha.x - hb.x;
  const double gy = std::abs(d.y) - ha.y - hb.y;
  if (gx <= 0.0 && gy <= 0.0) return std::max(gx, gy);
  return std::hypot(std::max(gx, 0.0), std::max(gy, 0.0));
}

/// Rejection-sampled clutter. Spheres are placed first, then boxes; once the
/// attempt budget is spent the remaining obstacles are skipped.
inline Environment generate_environment(const EnvGenConfig &cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(seed, {0x656e76}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Rect &b = cfg.bounds;

  std::vector<Obstacle> placed;
  int attempts = 0;
  auto place = [&](bool sphere) {
    while (attempts < cfg.max_attempts) {
      ++attempts;
      Point2 half;
      Obstacle o;
      if (sphere) {
        const double r = cfg.sphere_radius_min + unit(rng) * (cfg.sphere_radius_max - cfg.sphere_radius_min);
        half = {r, r};
        o.shape = Circle{{}, r};
      } else {
        const double ex = cfg.box_edge_min + unit(rng) * (cfg.box_edge_max - cfg.box_edge_min);
        const double ey = cfg.box_edge_min + unit(rng) * (cfg.box_edge_max - cfg.box_edge_min);
        half = {0.5 * ex, 0.5 * ey};
        o.shape = Box{{}, half};
      }
      const double lox = b.min.x + half.x + cfg.wall_clearance, hix = b.max.x - half.x - cfg.wall_clearance;
      const double loy = b.min.y + half.y + cfg.wall_clearance, hiy = b.max.y - half.y - cfg.wall_clearance;
      if (lox > hix || loy > hiy) throw GenerationFailed("obstacles cannot fit inside the workspace");
      const Point2 c{lox + unit(rng) * (hix - lox), loy + unit(rng) * (hiy - loy)};
      std::visit([&](auto &s) { s.center = c; }, o.shape);
      const bool clear = std::all_of(placed.begin(), placed.end(), [&](const Obstacle &p) {
        return obstacle_clearance(o, p) >= cfg.min_clearance;
      });
      if (clear) {
        placed.push_back(o);
        return;
      }
    }
  };
  for (int i = 0; i < cfg.n_spheres_max; ++i) place(true);
  for (int i = 0; i < cfg.n_boxes_max; ++i) place(false);

  std::vector<Obstacle> kept;
  for (const auto &o : placed)
    if (unit(rng) >= cfg.removal_probability) kept.push_back(o);
  return Environment(cfg.bounds, std::move(kept));
}

struct MissionGenConfig {
  int n_waypoints = 5;
  double min_separation = 0.4;
  /// Extra clearance beyond robot_radius required at the anchor and waypoints.
  double clearance_margin = 0.03;
  int max_attempts = 100000;
};

struct MissionPoints {
  Point2 anchor;
  std::vector<Point2> waypoints;
};

/// Anchor plus waypoints sampled uniformly in free space with pairwise separation.
inline MissionPoints synthesize_mission(const Environment &env, double robot_radius, const MissionGenConfig &cfg,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {0x6d697373}));
  const Rect &b = env.bounds();
  const double pad = robot_radius + cfg.clearance_margin;
  std::uniform_real_distribution<double> ux(b.min.x + pad, b.max.x - pad);
  std::uniform_real_distribution<double> uy(b.min.y + pad, b.max.y - pad);
  std::vector<Point2> pts;
  int attempts = 0;
  while (static_cast<int>(pts.size()) < cfg.n_waypoints + 1) {
    if (++attempts > cfg.max_attempts) throw GenerationFailed("could not place mission waypoints");
    const double x = ux(rng);
    const Point2 p{x, uy(rng)};
    if (signed_distance(env, p) <= pad) continue;
    if (std::any_of(pts.begin(), pts.end(), [&](Point2 q) { return distance(p, q) < cfg.min_separation; }))
      continue;
    pts.push_back(p);
  }
  return {pts.front(), std::vector<Point2>(pts.begin() + 1, pts.end())};
}

/// A wall across the workspace made of three boxes with two passable gaps;
/// start below the wall, goal above, the straight line blocked by the middle box.
struct TwoCorridorScenario {
  Environment env;
  Point2 start;
  Point2 goal;
};

inline TwoCorridorScenario two_corridor_scenario() {
  std::vector<Obstacle> obs;
  obs.push_back({Box{{-0.635, 0.0}, {0.265, 0.08}}});
  obs.push_back({Box{{0.0, 0.0}, {0.12, 0.08}}});
  obs.push_back({Box{{0.635, 0.0}, {0.265, 0.08}}});
  return {Environment(Rect{}, std::move(obs)), {0.0, -0.7}, {0.0, 0.7}};
}

} // namespace tmpd
