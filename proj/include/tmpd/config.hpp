#pragma once

#include <cstdint>

#include "tmpd/backend.hpp"
#include "tmpd/errors.hpp"
#include "tmpd/frontend.hpp"

namespace tmpd {

struct AStarConfig {
  double grid_res = 0.01;
  double robot_radius = 0.02;
  std::int64_t node_budget = 2'000'000;
};

struct RrtConfig {
  int max_iters = 50'000;
  double step_size = 0.05;
  double robot_radius = 0.05;
  double goal_bias = 0.05;
};

/// Every tunable of the planner stack. `w_th` and `robot_radius` are shared
/// by the front-end, the back-end and the mission bookkeeping.
struct PlannerConfig {
  double w_th = 0.95;
  double robot_radius = 0.05;
  FrontendConfig frontend{};
  double lambda = 0.5;
  double alpha = 1.0;
  // Weights of the smoothness/length objective used by the ablation ranking.
  double lambda_s = 1.0;
  double lambda_l = 1.0;
  int resample_rounds = 3;
  double escalation = 1.5;
  TautOptions taut{};
  AStarConfig astar{};
  RrtConfig rrt{};

  void validate() const {
    if (!(w_th > 0.0 && w_th <= 1.0)) throw InvalidArgument("W_th must lie in (0, 1]");
    if (!(robot_radius >= 0.0)) throw InvalidArgument("robot_radius must be non-negative");
    if (lambda < 0.0 || alpha < 0.0 || lambda_s < 0.0 || lambda_l < 0.0)
      throw InvalidArgument("weights must be non-negative");
    if (resample_rounds < 1) throw InvalidArgument("resample_rounds must be >= 1");
    if (!(escalation >= 1.0)) throw InvalidArgument("escalation must be >= 1");
    if (!(astar.grid_res > 0.0) || astar.robot_radius < 0.0 || astar.node_budget < 1)
      throw InvalidArgument("invalid Topo-A* settings");
    if (rrt.max_iters < 1 || !(rrt.step_size > 0.0) || rrt.robot_radius < 0.0 ||
        !(rrt.goal_bias >= 0.0 && rrt.goal_bias <= 1.0))
      throw InvalidArgument("invalid Topo-RRT settings");
    frontend_config(0).validate();
  }

  /// Front-end settings for resampling round `round` (sigma_extra escalated).
  FrontendConfig frontend_config(int round) const {
    FrontendConfig f = frontend;
    f.robot_radius = robot_radius;
    for (int i = 0; i < round; ++i) f.sigma_extra *= escalation;
    return f;
  }

  BackendConfig backend_config() const {
    BackendConfig b;
    b.w_th = w_th;
    b.lambda = lambda;
    b.alpha = alpha;
    b.robot_radius = robot_radius;
    b.taut = taut;
    return b;
  }
};

} // namespace tmpd
