#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tmpd/scenario.hpp"
#include "tmpd/topology.hpp"

using namespace tmpd;

namespace {

std::vector<Point2> random_polyline(std::mt19937_64 &rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

// Closed polygon approximating a circle of radius r about c, `turns` times CCW.
std::vector<Point2> loop_around(Point2 c, double r, double turns, Point2 from, int per_turn = 64) {
  const double a0 = std::atan2(from.y - c.y, from.x - c.x);
  std::vector<Point2> pts;
  const int n = static_cast<int>(std::lround(std::abs(turns) * per_turn));
  for (int k = 0; k <= n; ++k) {
    const double a = a0 + 2.0 * std::numbers::pi * turns * k / n;
    pts.push_back(c + Point2{r * std::cos(a), r * std::sin(a)});
  }
  return pts;
}

} // namespace

TEST(WindingNumber, ClosedSquareIsOneTurn) {
  const Trajectory sq{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
  EXPECT_NEAR(winding_number(sq, {0.0, 0.0}), 1.0, 1e-9);
  EXPECT_NEAR(winding_number(sq.reversed(), {0.0, 0.0}), -1.0, 1e-9);
}

TEST(WindingNumber, BottomEdgeIsQuarterTurn) {
  const Trajectory seg{{-1, -1}, {1, -1}};
  EXPECT_NEAR(winding_number(seg, {0.0, 0.0}), 0.25, 1e-12);
  EXPECT_NEAR(oracle::quad_segment_turns({-1, -1}, {1, -1}, {0, 0}), 0.25, 1e-9);
}

TEST(WindingNumber, MatchesQuadrature) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    if (point_segment_distance(c, a, b) < 0.05) continue;
    const std::vector<Point2> seg{a, b};
    EXPECT_NEAR(winding_number(seg, c), oracle::quad_segment_turns(a, b, c), 1e-7);
    ++checked;
  }
}

TEST(WindingNumber, AntisymmetryAndAdditivity) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto p1 = random_polyline(rng, 5);
    auto p2 = random_polyline(rng, 4);
    p2.insert(p2.begin(), p1.back());
    const Point2 c{u(rng), u(rng)};
    std::vector<Point2> joined(p1);
    joined.insert(joined.end(), p2.begin() + 1, p2.end());
    std::vector<Point2> rev(p1.rbegin(), p1.rend());
    try {
      EXPECT_NEAR(winding_number(rev, c), -winding_number(p1, c), 1e-9);
      EXPECT_NEAR(winding_number(joined, c), winding_number(p1, c) + winding_number(p2, c), 1e-9);
    } catch (const CenterOnCurve &) {
    }
  }
}

TEST(WindingNumber, ClosedLoopsAreIntegral) {
  const auto env = generate_environment(EnvGenConfig{}, 5);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    auto pts = random_polyline(rng, 6);
    pts.push_back(pts.front());
    const Trajectory loop(pts);
    if (!trajectory_collision_free(env, loop, 0.0)) continue;
    for (double w : winding_vector(loop, env).values) EXPECT_NEAR(w, std::round(w), 1e-6);
  }
}

TEST(WindingNumber, CenterOnCurveThrows) {
  const std::vector<Point2> seg{{-1.0, 0.0}, {1.0, 0.0}};
  EXPECT_THROW(winding_number(seg, {0.0, 0.0}), CenterOnCurve);
  EXPECT_THROW(winding_number(seg, {1.0, 0.0}), CenterOnCurve);
}

TEST(WindingVector, EmptyEnvironment) {
  EXPECT_EQ(winding_vector(Trajectory{{0, 0}, {1, 0}}, Environment{}).size(), 0u);
}

TEST(WindingVector, FarStraightPathMatchesQuadrature) {
  const Environment env(Rect{}, {Obstacle{Circle{{0.5, 0.5}, 0.1}}});
  const Trajectory t{{-0.9, -0.8}, {0.9, -0.6}};
  EXPECT_NEAR(winding_vector(t, env)[0], oracle::quad_winding(t.points(), {0.5, 0.5}), 1e-9);
}

TEST(WindingVector, ConcatenationAdds) {
  const auto env = generate_environment(EnvGenConfig{}, 9);
  const Trajectory a{{-0.95, -0.95}, {0.95, -0.95}};
  const Trajectory b{{0.95, -0.95}, {0.95, 0.95}};
  const auto sum = winding_vector(a, env) + winding_vector(b, env);
  const auto joined = winding_vector(concatenate(a, b), env);
  for (std::size_t j = 0; j < env.size(); ++j) EXPECT_NEAR(joined[j], sum[j], 1e-12);
}

TEST(HomotopySignature, IdenticalPathsGiveZero) {
  const auto env = generate_environment(EnvGenConfig{}, 3);
  const Trajectory t{{-0.95, -0.95}, {0.95, 0.95}};
  EXPECT_TRUE(homotopy_signature(t, t, env).is_zero());
}

TEST(HomotopySignature, OppositeSidesOfCircle) {
  const Environment env(Rect{}, {Obstacle{Circle{{0.0, 0.0}, 0.2}}, Obstacle{Circle{{0.6, 0.6}, 0.1}}});
  const Trajectory above{{-0.6, 0.0}, {0.0, 0.4}, {0.6, 0.0}};
  const Trajectory below{{-0.6, 0.0}, {0.0, -0.4}, {0.6, 0.0}};
  const auto sig = homotopy_signature(below, above, env);
  EXPECT_EQ(sig.loops, (std::vector<int>{1, 0}));
  // Quadrature of the closed loop below ⊕ reverse(above) agrees.
  std::vector<Point2> loop(below.points());
  const auto rev = above.reversed();
  loop.insert(loop.end(), rev.points().begin() + 1, rev.points().end());
  EXPECT_NEAR(oracle::quad_winding(loop, {0.0, 0.0}), 1.0, 1e-7);
  EXPECT_EQ(homotopy_signature(above, below, env).loops, (std::vector<int>{-1, 0}));
}

TEST(HomotopySignature, InsertedLoopCountsOnce) {
  const Environment env(Rect{}, {Obstacle{Circle{{0.0, 0.3}, 0.1}}, Obstacle{Circle{{0.0, -0.5}, 0.1}}});
  const Point2 s{-0.6, 0.0}, g{0.6, 0.0};
  const Trajectory ref{s, g};
  std::vector<Point2> pts{s};
  const auto loop = loop_around({0.0, 0.3}, 0.2, 1.0, {0.0, 0.1});
  pts.push_back({0.0, 0.1});
  pts.insert(pts.end(), loop.begin() + 1, loop.end());
  pts.push_back(g);
  EXPECT_EQ(homotopy_signature(Trajectory(pts), ref, env).loops, (std::vector<int>{1, 0}));
}

TEST(HomotopySignature, Errors) {
  const Environment env(Rect{}, {Obstacle{Circle{{0.0, 0.0}, 0.1}}});
  EXPECT_THROW(homotopy_signature(Trajectory{{-0.5, 0.5}, {0.5, 0.5}}, Trajectory{{-0.5, 0.5}, {0.5, 0.6}}, env),
               EndpointMismatch);
}

TEST(TautConfiguration, EmptyEnvironmentGivesStraightSegment) {
  const Trajectory t{{-0.5, -0.5}, {0.3, 0.7}, {0.1, -0.2}, {0.6, 0.4}};
  const Trajectory taut = taut_configuration(t, Environment{}, 0.05);
  EXPECT_EQ(taut, (Trajectory{{-0.5, -0.5}, {0.6, 0.4}}));
}

TEST(TautConfiguration, RejectsInputInCollision) {
  const Environment env(Rect{}, {Obstacle{Circle{{0.0, 0.0}, 0.2}}});
  EXPECT_THROW(taut_configuration(Trajectory{{-0.5, 0.0}, {0.5, 0.0}}, env, 0.05), InputInCollision);
}

TEST(TautConfiguration, WideDetourAroundCircleMatchesOracle) {
  const Environment env(Rect{}, {Obstacle{Circle{{0.0, 0.0}, 0.2}}});
  const Trajectory detour{{-0.7, 0.0}, {-0.6, 0.7}, {0.6, 0.7}, {0.7, 0.0}};
  const Trajectory taut = taut_configuration(detour, env, 0.05);
  const auto ref = oracle::shortest_homotopic_length(env, detour, 0.05);
  ASSERT_TRUE(ref.has_value());
  EXPECT_LE(std::abs(taut.length() - *ref) / *ref, 0.02);
  // Analytic value: two tangents plus the arc on the inflated circle.
  const double R = 0.25, d = 0.7;
  const double tangent = std::sqrt(d * d - R * R);
  const double arc = R * (std::numbers::pi - 2.0 * std::acos(R / d));
  EXPECT_NEAR(taut.length(), 2.0 * tangent + arc, 0.01 * (2.0 * tangent + arc));
}

TEST(TautConfiguration, RandomDetoursAgainstOracle) {
  std::mt19937_64 rng(21);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 40; ++seed) {
    const auto env = generate_environment(EnvGenConfig{}, seed);
    const auto m = synthesize_mission(env, 0.05, MissionGenConfig{1}, seed);
    const auto detour = oracle::random_detour(env, m.anchor, m.waypoints[0], 0.05, rng);
    if (!detour) continue;
    const Trajectory taut = taut_configuration(*detour, env, 0.05);
    EXPECT_TRUE(trajectory_collision_free(env, taut, 0.05));
    EXPECT_TRUE(homotopy_signature(taut, *detour, env).is_zero());
    EXPECT_LE(taut.length(), detour->length() + 1e-12);
    EXPECT_EQ(taut_configuration(taut, env, 0.05), taut);
    const auto ref = oracle::shortest_homotopic_length(env, *detour, 0.05);
    ASSERT_TRUE(ref.has_value());
    EXPECT_LE(std::abs(taut.length() - *ref) / *ref, 0.02) << "seed " << seed;
    ++checked;
  }
}

TEST(TopologicalEnergy, Examples) {
  EXPECT_DOUBLE_EQ(topological_energy(WindingVector{{0.0, 0.0}}, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(topological_energy(WindingVector{{0.5}}, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(topological_energy(WindingVector{{0.25, -0.5}}, 2.0), 0.625);
}

TEST(TopologicalEnergy, InvariantUnderWaypointInsertion) {
  const auto env = generate_environment(EnvGenConfig{}, 17);
  const Trajectory t{{-0.97, -0.97}, {0.97, -0.97}, {0.97, 0.97}};
  const Trajectory dense{{-0.97, -0.97}, {0.1, -0.97}, {0.97, -0.97}, {0.97, 0.2}, {0.97, 0.97}};
  EXPECT_NEAR(topological_energy(t, env, 1.0), topological_energy(dense, env, 1.0), 1e-12);
}

TEST(MaxAbsWinding, Examples) {
  EXPECT_DOUBLE_EQ(max_abs_winding(Trajectory{{0, 0}, {1, 0}}, Environment{}), 0.0);

  const Point2 c{0.0, 0.0};
  const Environment env(Rect{}, {Obstacle{Circle{c, 0.05}}});
  // Spiral of 1.2 turns with growing radius.
  std::vector<Point2> spiral;
  for (int k = 0; k <= 240; ++k) {
    const double a = 2.0 * std::numbers::pi * 1.2 * k / 240.0;
    const double r = 0.2 + 0.3 * k / 240.0;
    spiral.push_back({r * std::cos(a), r * std::sin(a)});
  }
  const Trajectory s(spiral);
  EXPECT_NEAR(max_abs_winding(s, env), 1.2, 1e-9);
  EXPECT_NEAR(oracle::quad_winding(spiral, c), 1.2, 1e-7);

  const Environment two(Rect{}, {Obstacle{Circle{{-0.3, 0.0}, 0.05}}, Obstacle{Circle{{0.3, 0.0}, 0.05}}});
  const Trajectory sp{{-0.8, 0.0}, {-0.3, 0.3}, {0.0, 0.0}, {0.3, -0.3}, {0.8, 0.0}};
  const auto w = winding_vector(sp, two);
  EXPECT_DOUBLE_EQ(max_abs_winding(sp, two), std::max(std::abs(w[0]), std::abs(w[1])));
}
