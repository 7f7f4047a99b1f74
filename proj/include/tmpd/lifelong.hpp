#pragma once

// Lifelong mission loop: per-step planning against the accumulated history,
// commit bookkeeping and mission-level reports.

#include <chrono>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmpd/backend.hpp"
#include "tmpd/baselines.hpp"
#include "tmpd/config.hpp"
#include "tmpd/errors.hpp"
#include "tmpd/frontend.hpp"
#include "tmpd/geometry2d.hpp"
#include "tmpd/history.hpp"
#include "tmpd/random.hpp"
#include "tmpd/topology.hpp"

namespace tmpd {

enum class StepStatus { ok, fallback_unsafe, failed };

inline std::string_view to_string(StepStatus s) {
  switch (s) {
  case StepStatus::ok: return "ok";
  case StepStatus::fallback_unsafe: return "fallback_unsafe";
  case StepStatus::failed: return "failed";
  }
  return "unknown";
}

struct StepResult {
  std::optional<Trajectory> segment;
  /// Back-end ledger of the round that produced the segment (TMPD only).
  std::optional<SelectionResult> selection;
  /// max |W| of the taut history + segment; NaN when no segment was produced.
  double post_max_winding = std::numeric_limits<double>::quiet_NaN();
  bool collision_free = false;
  double time_s = 0.0;
  StepStatus status = StepStatus::failed;
  int rounds = 0;
  double sigma_extra = 0.0;
};

struct Mission {
  Environment env;
  Point2 anchor;
  std::vector<Point2> waypoints;

  void validate(double robot_radius) const {
    if (waypoints.empty()) throw InvalidArgument("mission has no waypoints");
    auto check = [&](Point2 p, const char *what) {
      if (!env.bounds().contains(p) || !(signed_distance(env, p) > robot_radius))
        throw InvalidArgument(std::string(what) + " is not in free space");
    };
    check(anchor, "anchor");
    Point2 prev = anchor;
    for (Point2 g : waypoints) {
      check(g, "waypoint");
      if (g == prev) throw DegenerateEndpoints("consecutive mission points coincide");
      prev = g;
    }
  }
};

struct MissionReport {
  std::string planner;
  std::vector<StepResult> steps;
  std::size_t n_waypoints = 0;
  /// Every waypoint reached with collision-free segments.
  bool reached = false;
  bool collision_free = false;
  /// Every committed step kept its taut global max |W| below W_th.
  bool tangle_free = false;
  std::vector<Point2> global;
  double length = 0.0;
  double topo_energy = 0.0;
  double smoothness = 0.0;
  double final_max_winding = 0.0;
  double time_s = 0.0;
};

/// Sum of unsquared second-difference norms.
inline double smoothness_metric(std::span<const Point2> pts) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) s += norm(pts[i + 1] - 2.0 * pts[i] + pts[i - 1]);
  return s;
}

/// Tautens history + segment and reports its largest |W| and whether the
/// segment is collision-free at `robot_radius`.
inline void assess_step(StepResult &step, const TetherHistory &history, const Environment &env, double robot_radius,
                        const TautOptions &taut) {
  step.collision_free = trajectory_collision_free(env, *step.segment, robot_radius);
  const Trajectory global = history.global(*step.segment);
  if (trajectory_collision_free(env, global, robot_radius))
    step.post_max_winding = max_abs_winding(taut_configuration(global, env, robot_radius, taut), env);
  else
    step.post_max_winding = max_abs_winding(global, env);
}

inline TetherHistory commit_step(const TetherHistory &history, const StepResult &step, const Environment &env) {
  if (step.status == StepStatus::failed || !step.segment) throw InvalidArgument("cannot commit a failed step");
  return history.committed(*step.segment, env);
}

/// One TMPD step: sample a pool, run the lazy back-end. An empty or unsafe
/// pool triggers a fresh round with sigma_extra scaled by `escalation`, up to
/// `resample_rounds` rounds in total. The least entangled fallback is kept.
inline StepResult plan_step(const TetherHistory &history, Point2 goal, const Environment &env,
                            const PlannerConfig &cfg, std::uint64_t seed, int jobs = 1) {
  cfg.validate();
  if (history.tip() == goal) throw DegenerateEndpoints("history tip and goal coincide");
  const BackendConfig bcfg = cfg.backend_config();
  StepResult best;
  for (int round = 0; round < cfg.resample_rounds; ++round) {
    const FrontendConfig fcfg = cfg.frontend_config(round);
    const std::uint64_t round_seed = derive_seed(seed, {static_cast<std::uint64_t>(round)});
    const CandidatePool pool = generate_candidates(history.tip(), goal, env, fcfg, round_seed, jobs);
    SelectionResult sel;
    try {
      sel = select_trajectory(pool, history, env, bcfg);
    } catch (const EmptyPool &) {
      continue;
    }
    StepResult step;
    step.rounds = round + 1;
    step.sigma_extra = fcfg.sigma_extra;
    step.segment = sel.chosen;
    step.post_max_winding = *sel.chosen_entry().taut_max_winding;
    step.collision_free = true;
    step.status = sel.safe ? StepStatus::ok : StepStatus::fallback_unsafe;
    step.selection = std::move(sel);
    if (step.status == StepStatus::ok) return step;
    if (!best.segment || step.post_max_winding < best.post_max_winding) best = std::move(step);
  }
  if (!best.segment) best.sigma_extra = cfg.frontend_config(cfg.resample_rounds - 1).sigma_extra;
  best.rounds = cfg.resample_rounds;
  return best;
}

/// Front-end without the topological back-end: among collision-free
/// candidates pick the minimizer of lambda_s * J_smooth + lambda_l * length.
/// Only an empty pool triggers resampling.
inline StepResult plan_step_no_backend(const TetherHistory &history, Point2 goal, const Environment &env,
                                       const PlannerConfig &cfg, std::uint64_t seed, int jobs = 1) {
  cfg.validate();
  if (history.tip() == goal) throw DegenerateEndpoints("history tip and goal coincide");
  StepResult step;
  for (int round = 0; round < cfg.resample_rounds; ++round) {
    const FrontendConfig fcfg = cfg.frontend_config(round);
    const std::uint64_t round_seed = derive_seed(seed, {static_cast<std::uint64_t>(round)});
    const CandidatePool pool = generate_candidates(history.tip(), goal, env, fcfg, round_seed, jobs);
    std::optional<std::size_t> pick;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const Trajectory &tau = pool.trajectories[i];
      if (!trajectory_collision_free(env, tau, cfg.robot_radius)) continue;
      const double j = cfg.lambda_s * smoothness_cost(tau).cost + cfg.lambda_l * tau.length();
      if (j < best) {
        best = j;
        pick = i;
      }
    }
    step.rounds = round + 1;
    step.sigma_extra = fcfg.sigma_extra;
    if (!pick) continue;
    step.segment = pool.trajectories[*pick];
    assess_step(step, history, env, cfg.robot_radius, cfg.taut);
    step.status = step.post_max_winding < cfg.w_th ? StepStatus::ok : StepStatus::fallback_unsafe;
    return step;
  }
  return step;
}

inline StepResult plan_step_astar(const TetherHistory &history, Point2 goal, const Environment &env,
                                  const PlannerConfig &cfg, std::uint64_t /*seed*/, int /*jobs*/ = 1) {
  cfg.validate();
  StepResult step;
  step.rounds = 1;
  step.segment = topo_astar(env, history.tip(), goal, history.windings(), cfg.astar, cfg.w_th);
  if (!step.segment) return step;
  assess_step(step, history, env, cfg.astar.robot_radius, cfg.taut);
  step.status = step.collision_free && step.post_max_winding < cfg.w_th ? StepStatus::ok : StepStatus::fallback_unsafe;
  return step;
}

inline StepResult plan_step_rrt(const TetherHistory &history, Point2 goal, const Environment &env,
                                const PlannerConfig &cfg, std::uint64_t seed, int /*jobs*/ = 1) {
  cfg.validate();
  StepResult step;
  step.rounds = 1;
  step.segment = topo_rrt(env, history.tip(), goal, history.windings(), cfg.rrt, cfg.w_th, seed);
  if (!step.segment) return step;
  assess_step(step, history, env, cfg.rrt.robot_radius, cfg.taut);
  step.status = step.collision_free && step.post_max_winding < cfg.w_th ? StepStatus::ok : StepStatus::fallback_unsafe;
  return step;
}

template <class P>
concept StepPlanner = requires(const P &p, const TetherHistory &h, Point2 g, const Environment &env,
                               const PlannerConfig &cfg, std::uint64_t seed, int jobs) {
  { p(h, g, env, cfg, seed, jobs) } -> std::same_as<StepResult>;
};

/// Runs the planner over every waypoint in order. Step k uses
/// derive_seed(master_seed, {k}); a failed step ends the mission.
template <StepPlanner P>
MissionReport run_mission(const Mission &mission, const PlannerConfig &cfg, std::uint64_t master_seed,
                          const P &planner, std::string name = "tmpd", int jobs = 1) {
  cfg.validate();
  mission.validate(cfg.robot_radius);
  MissionReport report;
  report.planner = std::move(name);
  report.n_waypoints = mission.waypoints.size();
  TetherHistory history(mission.anchor, mission.env);
  bool all_free = true;
  bool all_untangled = true;
  for (std::size_t k = 0; k < mission.waypoints.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    StepResult step = planner(history, mission.waypoints[k], mission.env, cfg, derive_seed(master_seed, {k}), jobs);
    step.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.time_s += step.time_s;
    if (step.status == StepStatus::failed) {
      report.steps.push_back(std::move(step));
      break;
    }
    all_free = all_free && step.collision_free;
    all_untangled = all_untangled && step.post_max_winding < cfg.w_th;
    history = commit_step(history, step, mission.env);
    report.final_max_winding = step.post_max_winding;
    report.steps.push_back(std::move(step));
  }
  const bool completed = history.segments() == mission.waypoints.size();
  report.collision_free = all_free;
  report.reached = completed && all_free;
  report.tangle_free = all_untangled;
  report.global.assign(history.points().begin(), history.points().end());
  report.length = path_length(report.global);
  report.topo_energy = topological_energy(history.windings(), cfg.alpha);
  report.smoothness = smoothness_metric(report.global);
  return report;
}

inline MissionReport run_mission(const Mission &mission, const PlannerConfig &cfg, std::uint64_t master_seed,
                                 int jobs = 1) {
  return run_mission(
      mission, cfg, master_seed,
      [](const TetherHistory &h, Point2 g, const Environment &env, const PlannerConfig &c, std::uint64_t s, int j) {
        return plan_step(h, g, env, c, s, j);
      },
      "tmpd", jobs);
}

} // namespace tmpd
