#pragma once

// Topology-aware classical baselines: winding-augmented grid A* and
// winding-pruned RRT. Both veto any partial path whose accumulated winding,
// added to the history winding, reaches W_th about some obstacle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "tmpd/config.hpp"
#include "tmpd/errors.hpp"
#include "tmpd/geometry2d.hpp"
#include "tmpd/topology.hpp"

namespace tmpd {

/// Node identity resolution of the augmented search: 1/16 turn.
inline constexpr double kWindingQuantum = 1.0 / 16.0;

inline std::int32_t quantize_winding(double w) { return static_cast<std::int32_t>(std::lround(w / kWindingQuantum)); }

namespace detail {

inline void add_edge_winding(std::span<const Obstacle> obs, Point2 a, Point2 b, std::span<const double> from,
                             std::span<double> to) {
  for (std::size_t j = 0; j < obs.size(); ++j)
    to[j] = from[j] + subtended_angle(a, b, obs[j].center()) / (2.0 * std::numbers::pi);
}

inline bool winding_admissible(std::span<const double> history, std::span<const double> w, double w_th) {
  for (std::size_t j = 0; j < w.size(); ++j)
    if (std::abs(history[j] + w[j]) >= w_th) return false;
  return true;
}

} // namespace detail

/// Uniform grid over the workspace; cell (i, j) has center min + (i + 0.5, j + 0.5) * res.
class Grid {
public:
  Grid(const Rect &bounds, double res) : min_(bounds.min), res_(res) {
    if (!(res > 0.0)) throw InvalidArgument("grid resolution must be positive");
    nx_ = std::max(1, static_cast<int>(std::ceil((bounds.max.x - bounds.min.x) / res - 1e-9)));
    ny_ = std::max(1, static_cast<int>(std::ceil((bounds.max.y - bounds.min.y) / res - 1e-9)));
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution() const { return res_; }
  std::int32_t cells() const { return nx_ * ny_; }
  std::int32_t index(int i, int j) const { return j * nx_ + i; }
  int col(std::int32_t c) const { return c % nx_; }
  int row(std::int32_t c) const { return c / nx_; }
  bool inside(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
  Point2 center(std::int32_t c) const { return {min_.x + (col(c) + 0.5) * res_, min_.y + (row(c) + 0.5) * res_}; }
  std::int32_t cell_of(Point2 p) const {
    const int i = std::clamp(static_cast<int>(std::floor((p.x - min_.x) / res_)), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y - min_.y) / res_)), 0, ny_ - 1);
    return index(i, j);
  }

private:
  Point2 min_;
  double res_;
  int nx_ = 1;
  int ny_ = 1;
};

inline constexpr std::array<std::array<int, 2>, 8> kEightNeighbours{
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

struct SearchStats {
  std::int64_t nodes = 0;
  std::int64_t expansions = 0;
  bool budget_exhausted = false;
  /// Cost of the returned path (polyline length).
  double cost = 0.0;
};

/// Winding-augmented 8-connected A*. States are (cell, winding quantized at
/// 1/16 turn); windings are accumulated exactly along edges and only
/// quantized to form the state identity. The path leaves `start` into a cell
/// of its 3x3 neighbourhood and enters `goal` from one, so the polyline is
/// start, cell centers..., goal. Returns nullopt when the open set empties
/// or the node budget is spent.
inline std::optional<Trajectory> topo_astar(const Environment &env, Point2 start, Point2 goal,
                                            const WindingVector &history, const AStarConfig &cfg, double w_th,
                                            SearchStats *stats = nullptr) {
  if (start == goal) throw DegenerateEndpoints("start and goal coincide");
  if (history.size() != env.size()) throw InvalidArgument("history winding does not match the environment");
  const Grid grid(env.bounds(), cfg.grid_res);
  const double r = cfg.robot_radius;
  const std::size_t m = env.size();
  const auto obs = env.obstacles();
  SearchStats local;
  SearchStats &st = stats ? *stats : local;
  st = {};

  constexpr std::int32_t kStart = -1;
  constexpr std::int32_t kGoal = -2;
  const std::int32_t goal_cell = grid.cell_of(goal);
  const std::int32_t start_cell = grid.cell_of(start);

  // Lazily evaluated cell and edge feasibility.
  std::vector<std::int8_t> cell_free(static_cast<std::size_t>(grid.cells()), -1);
  std::vector<std::uint8_t> edge_known(static_cast<std::size_t>(grid.cells()), 0);
  std::vector<std::uint8_t> edge_free(static_cast<std::size_t>(grid.cells()), 0);
  auto is_cell_free = [&](std::int32_t c) {
    auto &f = cell_free[static_cast<std::size_t>(c)];
    if (f < 0) f = signed_distance(env, grid.center(c)) > r ? 1 : 0;
    return f == 1;
  };
  auto is_edge_free = [&](std::int32_t c, int dir, std::int32_t to) {
    const auto bit = static_cast<std::uint8_t>(1u << dir);
    auto &known = edge_known[static_cast<std::size_t>(c)];
    if (!(known & bit)) {
      known |= bit;
      if (segment_collision_free(env, grid.center(c), grid.center(to), r)) edge_free[static_cast<std::size_t>(c)] |= bit;
    }
    return (edge_free[static_cast<std::size_t>(c)] & bit) != 0;
  };

  struct Node {
    std::int32_t cell;
    std::int32_t parent;
    double g;
    bool closed;
    std::int32_t chain;  // next node with the same hash
  };
  std::vector<Node> nodes;
  std::vector<double> wind;         // m exact windings per node
  std::vector<std::int32_t> quant;  // m quantized windings per node
  std::unordered_map<std::uint64_t, std::int32_t> table;

  auto point_of = [&](std::int32_t cell) {
    if (cell == kStart) return start;
    if (cell == kGoal) return goal;
    return grid.center(cell);
  };
  auto key_hash = [&](std::int32_t cell, std::span<const std::int32_t> q) {
    std::uint64_t h = std::hash<std::int64_t>{}(cell) ^ 0x9e3779b97f4a7c15ULL;
    for (std::int32_t v : q) h = (h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(v))) * 0x100000001b3ULL;
    return h;
  };
  auto find = [&](std::uint64_t h, std::int32_t cell, std::span<const std::int32_t> q) -> std::int32_t {
    auto it = table.find(h);
    if (it == table.end()) return -1;
    for (std::int32_t n = it->second; n >= 0; n = nodes[static_cast<std::size_t>(n)].chain) {
      if (nodes[static_cast<std::size_t>(n)].cell != cell) continue;
      if (std::equal(q.begin(), q.end(), quant.begin() + static_cast<std::ptrdiff_t>(n * m))) return n;
    }
    return -1;
  };

  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  std::vector<double> w_new(m);
  std::vector<std::int32_t> q_new(m);
  auto relax_to = [&](std::int32_t from, std::int32_t cell) {
    const Point2 a = point_of(nodes[static_cast<std::size_t>(from)].cell);
    const Point2 b = point_of(cell);
    detail::add_edge_winding(obs, a, b, std::span<const double>(wind).subspan(static_cast<std::size_t>(from) * m, m),
                             w_new);
    if (!detail::winding_admissible(history.values, w_new, w_th)) return;
    for (std::size_t j = 0; j < m; ++j) q_new[j] = quantize_winding(w_new[j]);
    const double g = nodes[static_cast<std::size_t>(from)].g + distance(a, b);
    const std::uint64_t h = key_hash(cell, q_new);
    std::int32_t n = find(h, cell, q_new);
    if (n < 0) {
      if (st.nodes >= cfg.node_budget) {
        st.budget_exhausted = true;
        return;
      }
      n = static_cast<std::int32_t>(nodes.size());
      auto [it, inserted] = table.try_emplace(h, n);
      nodes.push_back({cell, from, g, false, inserted ? -1 : it->second});
      if (!inserted) it->second = n;
      wind.insert(wind.end(), w_new.begin(), w_new.end());
      quant.insert(quant.end(), q_new.begin(), q_new.end());
      ++st.nodes;
    } else {
      Node &node = nodes[static_cast<std::size_t>(n)];
      if (node.closed || g >= node.g) return;
      node.g = g;
      node.parent = from;
      std::copy(w_new.begin(), w_new.end(), wind.begin() + static_cast<std::ptrdiff_t>(n * m));
    }
    open.push({g + distance(b, goal), n});
  };

  auto near_goal = [&](std::int32_t c) {
    return std::abs(grid.col(c) - grid.col(goal_cell)) <= 1 && std::abs(grid.row(c) - grid.row(goal_cell)) <= 1;
  };

  nodes.push_back({kStart, -1, 0.0, false, -1});
  wind.assign(m, 0.0);
  quant.assign(m, 0);
  st.nodes = 1;
  if (!detail::winding_admissible(history.values, wind, w_th)) return std::nullopt;
  open.push({distance(start, goal), 0});

  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    Node &node = nodes[static_cast<std::size_t>(u)];
    if (node.closed || f > node.g + distance(point_of(node.cell), goal) + 1e-12) continue;
    node.closed = true;
    ++st.expansions;
    const std::int32_t cell = node.cell;
    if (cell == kGoal) {
      std::vector<Point2> pts;
      for (std::int32_t n = u; n >= 0; n = nodes[static_cast<std::size_t>(n)].parent)
        pts.push_back(point_of(nodes[static_cast<std::size_t>(n)].cell));
      std::reverse(pts.begin(), pts.end());
      st.cost = nodes[static_cast<std::size_t>(u)].g;
      return Trajectory(std::move(pts));
    }
    if (cell == kStart) {
      const int si = grid.col(start_cell), sj = grid.row(start_cell);
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (!grid.inside(si + di, sj + dj)) continue;
          const std::int32_t c = grid.index(si + di, sj + dj);
          if (is_cell_free(c) && segment_collision_free(env, start, grid.center(c), r)) relax_to(u, c);
        }
    } else {
      if (near_goal(cell) && segment_collision_free(env, grid.center(cell), goal, r)) relax_to(u, kGoal);
      const int ci = grid.col(cell), cj = grid.row(cell);
      for (int d = 0; d < 8; ++d) {
        const int ni = ci + kEightNeighbours[static_cast<std::size_t>(d)][0];
        const int nj = cj + kEightNeighbours[static_cast<std::size_t>(d)][1];
        if (!grid.inside(ni, nj)) continue;
        const std::int32_t c = grid.index(ni, nj);
        if (is_cell_free(c) && is_edge_free(cell, d, c)) relax_to(u, c);
      }
    }
    if (st.budget_exhausted) return std::nullopt;
  }
  return std::nullopt;
}

namespace detail {

// Bucket grid for nearest-neighbour queries over a growing point set.
class PointBuckets {
public:
  PointBuckets(const Rect &bounds, double cell) : grid_(bounds, cell), buckets_(static_cast<std::size_t>(grid_.cells())) {}

  void insert(Point2 p, std::int32_t id) { buckets_[static_cast<std::size_t>(grid_.cell_of(p))].push_back(id); }

  template <class PosFn>
  std::int32_t nearest(Point2 q, PosFn &&pos) const {
    const std::int32_t c = grid_.cell_of(q);
    const int ci = grid_.col(c), cj = grid_.row(c);
    std::int32_t best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    const int max_ring = std::max(grid_.nx(), grid_.ny());
    for (int ring = 0; ring <= max_ring; ++ring) {
      if (best >= 0 && (ring - 1) * grid_.resolution() > best_d) break;
      for (int dj = -ring; dj <= ring; ++dj)
        for (int di = -ring; di <= ring; ++di) {
          if (std::max(std::abs(di), std::abs(dj)) != ring || !grid_.inside(ci + di, cj + dj)) continue;
          for (std::int32_t id : buckets_[static_cast<std::size_t>(grid_.index(ci + di, cj + dj))]) {
            const double d = distance(q, pos(id));
            if (d < best_d || (d == best_d && id < best)) {
              best_d = d;
              best = id;
            }
          }
        }
    }
    return best;
  }

private:
  Grid grid_;
  std::vector<std::vector<std::int32_t>> buckets_;
};

} // namespace detail

/// RRT whose nodes carry the exact winding accumulated from the root. An
/// extension is rejected when it collides or when history + winding reaches
/// W_th about any obstacle. A goal connection is tried from every new node
/// within one step of the goal. The tree path is returned unsmoothed.
inline std::optional<Trajectory> topo_rrt(const Environment &env, Point2 start, Point2 goal,
                                          const WindingVector &history, const RrtConfig &cfg, double w_th,
                                          std::uint64_t seed, SearchStats *stats = nullptr) {
  if (start == goal) throw DegenerateEndpoints("start and goal coincide");
  if (history.size() != env.size()) throw InvalidArgument("history winding does not match the environment");
  const std::size_t m = env.size();
  const auto obs = env.obstacles();
  const double r = cfg.robot_radius;
  const Rect &b = env.bounds();
  SearchStats local;
  SearchStats &st = stats ? *stats : local;
  st = {};

  std::vector<Point2> pos{start};
  std::vector<std::int32_t> parent{-1};
  std::vector<double> wind(m, 0.0);
  detail::PointBuckets buckets(b, std::max(cfg.step_size, 0.02));
  buckets.insert(start, 0);
  st.nodes = 1;
  if (!detail::winding_admissible(history.values, wind, w_th)) return std::nullopt;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w_new(m), w_goal(m);

  auto path_to = [&](std::int32_t n) {
    std::vector<Point2> pts{goal};
    for (; n >= 0; n = parent[static_cast<std::size_t>(n)]) pts.push_back(pos[static_cast<std::size_t>(n)]);
    std::reverse(pts.begin(), pts.end());
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    st.cost = len;
    return Trajectory(std::move(pts));
  };
  auto try_goal = [&](std::int32_t n) {
    const Point2 p = pos[static_cast<std::size_t>(n)];
    if (distance(p, goal) > cfg.step_size || !segment_collision_free(env, p, goal, r)) return false;
    detail::add_edge_winding(obs, p, goal, std::span<const double>(wind).subspan(static_cast<std::size_t>(n) * m, m),
                             w_goal);
    return detail::winding_admissible(history.values, w_goal, w_th);
  };

  if (try_goal(0)) return path_to(0);
  for (int it = 0; it < cfg.max_iters; ++it) {
    ++st.expansions;
    Point2 sample = goal;
    if (unit(rng) >= cfg.goal_bias) {
      const double x = b.min.x + unit(rng) * (b.max.x - b.min.x);
      sample = {x, b.min.y + unit(rng) * (b.max.y - b.min.y)};
    }
    const std::int32_t near = buckets.nearest(sample, [&](std::int32_t id) { return pos[static_cast<std::size_t>(id)]; });
    const Point2 from = pos[static_cast<std::size_t>(near)];
    const Point2 dir = sample - from;
    const double len = norm(dir);
    if (len < 1e-12) continue;
    const Point2 to = len > cfg.step_size ? from + (cfg.step_size / len) * dir : sample;
    if (!segment_collision_free(env, from, to, r)) continue;
    detail::add_edge_winding(obs, from, to,
                             std::span<const double>(wind).subspan(static_cast<std::size_t>(near) * m, m), w_new);
    if (!detail::winding_admissible(history.values, w_new, w_th)) continue;
    const auto id = static_cast<std::int32_t>(pos.size());
    pos.push_back(to);
    parent.push_back(near);
    wind.insert(wind.end(), w_new.begin(), w_new.end());
    buckets.insert(to, id);
    ++st.nodes;
    if (try_goal(id)) return path_to(id);
  }
  return std::nullopt;
}

} // namespace tmpd
