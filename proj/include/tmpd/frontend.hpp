#pragma once

// Generative front-end: batched annealed stochastic sampling of H-waypoint
// trajectories between fixed endpoints with cost-gradient guidance and a
// delayed-guidance schedule.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "tmpd/errors.hpp"
#include "tmpd/geometry2d.hpp"
#include "tmpd/random.hpp"

namespace tmpd {

struct FrontendConfig {
  int horizon = 64;          // H
  int diffusion_steps = 25;  // T
  double sigma_max = 0.5;
  double sigma_min = 0.005;
  double sigma_extra = 0.8;
  double tau_guide = 0.1;
  int n_guide = 10;
  int n_samples = 70;
  double lambda_collision = 1.0;
  double lambda_smooth = 0.01;
  double grad_scale = 2.0;  // alpha_t, constant over guided steps
  double robot_radius = 0.05;
  double collision_margin = 0.04;  // hinge margin beyond robot_radius
  // Prior-shrinkage denoiser.
  double shrink = 1.0;       // gamma_t; 0 selects 1/T
  double line_blend = 0.0;   // straight-line weight reached at t = 1
  int smoothing_passes = 1;
  /// When positive, the smoothed copy keeps only this many sine modes of the
  /// deviation from the straight line instead of three-point averaging.
  int spectral_modes = 4;

  double gamma() const { return shrink > 0.0 ? shrink : 1.0 / diffusion_steps; }

  void validate() const {
    if (horizon < 2) throw InvalidArgument("horizon must be >= 2");
    if (diffusion_steps < 1) throw InvalidArgument("diffusion_steps must be >= 1");
    if (n_guide < 0 || n_guide > diffusion_steps) throw InvalidArgument("n_guide must lie in [0, T]");
    if (!(tau_guide >= 0.0 && tau_guide <= 1.0)) throw InvalidArgument("tau_guide must lie in [0, 1]");
    if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
    if (!(sigma_max >= 0.0 && sigma_min >= 0.0 && sigma_extra >= 0.0))
      throw InvalidArgument("noise scales must be non-negative");
    if (sigma_min > sigma_max) throw InvalidArgument("sigma_min must not exceed sigma_max");
    if (lambda_collision < 0.0 || lambda_smooth < 0.0 || grad_scale < 0.0)
      throw InvalidArgument("guidance weights must be non-negative");
    if (!(line_blend >= 0.0 && line_blend <= 1.0)) throw InvalidArgument("line_blend must lie in [0, 1]");
    if (!(gamma() > 0.0 && gamma() <= 1.0)) throw InvalidArgument("shrink must lie in (0, 1]");
    if (smoothing_passes < 1) throw InvalidArgument("smoothing_passes must be >= 1");
    if (spectral_modes < 0) throw InvalidArgument("spectral_modes must be non-negative");
  }
};

/// Exponential schedule from sigma_max at t = T down to sigma_min at t = 1.
inline double noise_sigma(int t, const FrontendConfig &cfg) {
  const int T = cfg.diffusion_steps;
  if (T == 1 || cfg.sigma_max == 0.0) return cfg.sigma_max;
  if (cfg.sigma_min == 0.0) return t == 1 ? 0.0 : cfg.sigma_max;
  const double frac = static_cast<double>(T - t) / (T - 1);
  return cfg.sigma_max * std::pow(cfg.sigma_min / cfg.sigma_max, frac);
}

/// Guidance is active for n_guide consecutive steps that start once a
/// fraction tau_guide of the reverse process (t = T ... 1) has elapsed.
inline bool guidance_window(int t, const FrontendConfig &cfg) {
  const int onset = static_cast<int>(std::floor(cfg.diffusion_steps * (1.0 - cfg.tau_guide) + 1e-9));
  return t <= onset && t > onset - cfg.n_guide;
}

struct CostGradient {
  double cost = 0.0;
  std::vector<Point2> gradient;
};

/// sum_i hinge(margin - d(q_i))^2 with margin = robot_radius + extra_margin.
inline CostGradient collision_cost(std::span<const Point2> tau, const Environment &env, double robot_radius,
                                   double extra_margin = 0.02) {
  const double margin = robot_radius + extra_margin;
  CostGradient out;
  out.gradient.assign(tau.size(), Point2{});
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const DistanceSample s = signed_distance_with_gradient(env, tau[i]);
    const double h = margin - s.distance;
    if (h <= 0.0) continue;
    out.cost += h * h;
    out.gradient[i] = (-2.0 * h) * s.gradient;
  }
  return out;
}

inline CostGradient collision_cost(const Trajectory &tau, const Environment &env, double robot_radius,
                                   double extra_margin = 0.02) {
  return collision_cost(tau.waypoints(), env, robot_radius, extra_margin);
}

/// sum_{i=2}^{H-1} |q_{i+1} - 2 q_i + q_{i-1}|^2.
inline CostGradient smoothness_cost(std::span<const Point2> tau) {
  if (tau.size() < 3) throw InvalidArgument("smoothness cost needs at least three waypoints");
  CostGradient out;
  out.gradient.assign(tau.size(), Point2{});
  for (std::size_t i = 1; i + 1 < tau.size(); ++i) {
    const Point2 d = tau[i + 1] - 2.0 * tau[i] + tau[i - 1];
    out.cost += dot(d, d);
    out.gradient[i - 1] += 2.0 * d;
    out.gradient[i] += -4.0 * d;
    out.gradient[i + 1] += 2.0 * d;
  }
  return out;
}

inline CostGradient smoothness_cost(const Trajectory &tau) { return smoothness_cost(tau.waypoints()); }

// ---------------------------------------------------------------------------
// Denoisers

/// Anything that predicts the reverse-process mean of a trajectory at step t.
template <class D>
concept TrajectoryDenoiser = requires(const D &d, std::span<const Point2> tau, int t, const FrontendConfig &cfg) {
  { d(tau, t, cfg) } -> std::convertible_to<std::vector<Point2>>;
};

namespace detail {

inline std::vector<Point2> three_point_smooth(std::span<const Point2> tau, int passes) {
  const std::size_t n = tau.size();
  std::vector<Point2> smooth(tau.begin(), tau.end());
  std::vector<Point2> tmp(smooth);
  for (int pass = 0; pass < passes; ++pass) {
    for (std::size_t i = 1; i + 1 < n; ++i) tmp[i] = 0.25 * smooth[i - 1] + 0.5 * smooth[i] + 0.25 * smooth[i + 1];
    std::swap(smooth, tmp);
  }
  return smooth;
}

// Orthogonal projection of the deviation from the chord onto the lowest
// `modes` discrete sine modes.
inline std::vector<Point2> band_limit(std::span<const Point2> tau, int modes) {
  const std::size_t n = tau.size();
  std::vector<Point2> out(tau.begin(), tau.end());
  if (n < 3) return out;
  const double span = static_cast<double>(n - 1);
  const int kmax = std::min<int>(modes, static_cast<int>(n) - 2);
  std::vector<Point2> dev(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 line = lerp(tau.front(), tau.back(), static_cast<double>(i) / span);
    dev[i] = tau[i] - line;
    out[i] = line;
  }
  for (int k = 1; k <= kmax; ++k) {
    Point2 c;
    for (std::size_t i = 1; i + 1 < n; ++i) c += std::sin(k * std::numbers::pi * i / span) * dev[i];
    c = (2.0 / span) * c;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] += std::sin(k * std::numbers::pi * i / span) * c;
  }
  out.front() = tau.front();
  out.back() = tau.back();
  return out;
}

} // namespace detail

/// Stand-in for a learned mean predictor: shrinks interior waypoints by a
/// fraction gamma toward a smoothed copy of the path blended with the
/// straight-line mean. The blend weight grows as t approaches 0.
struct PriorShrinkageDenoiser {
  std::vector<Point2> operator()(std::span<const Point2> tau, int t, const FrontendConfig &cfg) const {
    const std::size_t n = tau.size();
    const std::vector<Point2> smooth = cfg.spectral_modes > 0 ? detail::band_limit(tau, cfg.spectral_modes)
                                                              : detail::three_point_smooth(tau, cfg.smoothing_passes);
    const int T = cfg.diffusion_steps;
    const double beta = T == 1 ? cfg.line_blend : cfg.line_blend * static_cast<double>(T - t) / (T - 1);
    const double gamma = cfg.gamma();
    std::vector<Point2> out(tau.begin(), tau.end());
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const Point2 line = lerp(tau.front(), tau.back(), static_cast<double>(i) / static_cast<double>(n - 1));
      const Point2 target = (1.0 - beta) * smooth[i] + beta * line;
      out[i] = tau[i] + gamma * (target - tau[i]);
    }
    return out;
  }
};

static_assert(TrajectoryDenoiser<PriorShrinkageDenoiser>);

// ---------------------------------------------------------------------------
// Sampling

namespace detail {

inline std::vector<Point2> straight_line(Point2 start, Point2 goal, int horizon) {
  std::vector<Point2> pts(static_cast<std::size_t>(horizon));
  for (int i = 0; i < horizon; ++i) pts[i] = lerp(start, goal, static_cast<double>(i) / (horizon - 1));
  pts.front() = start;
  pts.back() = goal;
  return pts;
}

inline std::vector<Point2> prior_points(Point2 start, Point2 goal, const FrontendConfig &cfg, std::mt19937_64 &rng) {
  if (start == goal) throw DegenerateEndpoints("start and goal coincide");
  std::vector<Point2> pts = straight_line(start, goal, cfg.horizon);
  const double sd = cfg.sigma_max * cfg.sigma_extra;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double zx = normal(rng);
    const double zy = normal(rng);
    pts[i] += Point2{sd * zx, sd * zy};
  }
  return pts;
}

template <TrajectoryDenoiser D>
std::vector<Point2> denoise_points(std::span<const Point2> tau, int t, const FrontendConfig &cfg,
                                   const Environment &env, std::mt19937_64 &rng, const D &denoiser) {
  std::vector<Point2> mu = denoiser(tau, t, cfg);
  const std::size_t n = mu.size();
  if (guidance_window(t, cfg) && cfg.grad_scale > 0.0) {
    const CostGradient gc = collision_cost(mu, env, cfg.robot_radius, cfg.collision_margin);
    CostGradient gs;
    if (n >= 3) gs = smoothness_cost(mu);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      Point2 g = cfg.lambda_collision * gc.gradient[i];
      if (n >= 3) g += cfg.lambda_smooth * gs.gradient[i];
      mu[i] -= cfg.grad_scale * g;
    }
  }
  // The final step returns the mean, as in ancestral sampling.
  if (t > 1) {
    const double sd = noise_sigma(t, cfg) * cfg.sigma_extra;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double zx = normal(rng);
      const double zy = normal(rng);
      mu[i] += Point2{sd * zx, sd * zy};
    }
  }
  mu.front() = tau.front();
  mu.back() = tau.back();
  return mu;
}

} // namespace detail

/// Straight line from start to goal with Gaussian perturbation of the interior
/// waypoints (per-axis std sigma_max * sigma_extra).
inline Trajectory prior_sample(Point2 start, Point2 goal, const FrontendConfig &cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  return Trajectory(detail::prior_points(start, goal, cfg, rng));
}

/// One guided reverse step t -> t-1: denoiser mean, guidance inside the
/// window, then Langevin noise on the interior waypoints (none at t = 1).
template <TrajectoryDenoiser D = PriorShrinkageDenoiser>
Trajectory denoise_step(const Trajectory &tau, int t, const FrontendConfig &cfg, const Environment &env,
                        std::mt19937_64 &rng, const D &denoiser = {}) {
  if (t < 1 || t > cfg.diffusion_steps) throw InvalidArgument("diffusion step out of range");
  return Trajectory(detail::denoise_points(tau.waypoints(), t, cfg, env, rng, denoiser));
}

struct CandidatePool {
  std::vector<Trajectory> trajectories;
  /// Collision cost of each chain's final sample.
  std::vector<double> final_collision_cost;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }
};

/// Runs `n_samples` independent reverse chains. Chain c draws from
/// derive_seed(master_seed, {c}), so the pool does not depend on `jobs`.
template <TrajectoryDenoiser D = PriorShrinkageDenoiser>
CandidatePool generate_candidates(Point2 start, Point2 goal, const Environment &env, const FrontendConfig &cfg,
                                  std::uint64_t master_seed, int jobs = 1, const D &denoiser = {}) {
  cfg.validate();
  if (start == goal) throw DegenerateEndpoints("start and goal coincide");
  const auto n = static_cast<std::size_t>(cfg.n_samples);
  std::vector<std::vector<Point2>> chains(n);
  std::vector<double> costs(n, 0.0);

  auto run_chain = [&](std::size_t c) {
    std::mt19937_64 rng(derive_seed(master_seed, {c}));
    std::vector<Point2> tau = detail::prior_points(start, goal, cfg, rng);
    for (int t = cfg.diffusion_steps; t >= 1; --t) tau = detail::denoise_points(tau, t, cfg, env, rng, denoiser);
    costs[c] = collision_cost(tau, env, cfg.robot_radius, cfg.collision_margin).cost;
    chains[c] = std::move(tau);
  };

  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t c = 0; c < n; ++c) run_chain(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < n; c += workers) run_chain(c);
      });
  }

  CandidatePool out;
  out.trajectories.reserve(n);
  for (auto &c : chains) out.trajectories.emplace_back(std::move(c));
  out.final_collision_cost = std::move(costs);
  return out;
}

} // namespace tmpd
