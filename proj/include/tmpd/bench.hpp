#pragma once

// Benchmark harness: seeded scenarios, multi-planner mission runs, metrics
// and CSV emission.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tmpd/config.hpp"
#include "tmpd/errors.hpp"
#include "tmpd/lifelong.hpp"
#include "tmpd/random.hpp"
#include "tmpd/scenario.hpp"

namespace tmpd {

struct MeanStd {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
};

/// Population mean and standard deviation; NaN for an empty sample.
inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

struct Metrics {
  std::size_t trials = 0;
  double collision_free_reach = 0.0;  // percent of trials
  /// Percent of reached trials that stayed tangle-free.
  double tangle_free_rate = 0.0;
  /// Percent of all trials that were reached and tangle-free.
  double tangle_free_unconditional = 0.0;
  MeanStd planning_time;  // seconds per step
  MeanStd path_length;
  MeanStd topo_energy;
  MeanStd smoothness;
};

/// Path statistics are taken over reached trials only.
inline Metrics compute_metrics(std::span<const MissionReport> reports) {
  if (reports.empty()) throw EmptyInput("no mission reports");
  Metrics m;
  m.trials = reports.size();
  std::size_t reached = 0, untangled = 0;
  std::vector<double> times, lengths, energies, smooth;
  for (const auto &r : reports) {
    for (const auto &s : r.steps) times.push_back(s.time_s);
    if (!r.reached) continue;
    ++reached;
    if (r.tangle_free) ++untangled;
    lengths.push_back(r.length);
    energies.push_back(r.topo_energy);
    smooth.push_back(r.smoothness);
  }
  const auto n = static_cast<double>(reports.size());
  m.collision_free_reach = 100.0 * static_cast<double>(reached) / n;
  m.tangle_free_rate = reached ? 100.0 * static_cast<double>(untangled) / static_cast<double>(reached) : 0.0;
  m.tangle_free_unconditional = 100.0 * static_cast<double>(untangled) / n;
  m.planning_time = mean_std(times);
  m.path_length = mean_std(lengths);
  m.topo_energy = mean_std(energies);
  m.smoothness = mean_std(smooth);
  return m;
}

using PlannerFn = std::function<StepResult(const TetherHistory &, Point2, const Environment &, const PlannerConfig &,
                                           std::uint64_t, int)>;

inline const std::vector<std::string> &planner_names() {
  static const std::vector<std::string> names{"tmpd", "no_backend", "topo_astar", "topo_rrt"};
  return names;
}

inline PlannerFn planner_by_name(const std::string &name) {
  if (name == "tmpd") return [](auto &h, Point2 g, auto &e, auto &c, std::uint64_t s, int j) { return plan_step(h, g, e, c, s, j); };
  if (name == "no_backend")
    return [](auto &h, Point2 g, auto &e, auto &c, std::uint64_t s, int j) { return plan_step_no_backend(h, g, e, c, s, j); };
  if (name == "topo_astar")
    return [](auto &h, Point2 g, auto &e, auto &c, std::uint64_t s, int j) { return plan_step_astar(h, g, e, c, s, j); };
  if (name == "topo_rrt")
    return [](auto &h, Point2 g, auto &e, auto &c, std::uint64_t s, int j) { return plan_step_rrt(h, g, e, c, s, j); };
  throw InvalidArgument("unknown planner '" + name + "'");
}

struct SuiteConfig {
  EnvGenConfig env{};
  MissionGenConfig mission{};
  PlannerConfig planner{};
  int trials = 100;
  std::uint64_t seed = 0;
  std::vector<std::string> planners{"tmpd", "no_backend"};
};

/// Seeds of one trial; every planner of the trial sees the same values.
struct TrialSeeds {
  std::uint64_t trial = 0;
  std::uint64_t environment = 0;
  std::uint64_t mission = 0;
  std::uint64_t planner = 0;
};

inline TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial) {
  TrialSeeds s;
  s.trial = derive_seed(master, {trial});
  s.environment = derive_seed(s.trial, {1});
  s.mission = derive_seed(s.trial, {2});
  s.planner = derive_seed(s.trial, {3});
  return s;
}

inline Mission make_trial_mission(const SuiteConfig &suite, const TrialSeeds &seeds) {
  Environment env = generate_environment(suite.env, seeds.environment);
  MissionPoints pts = synthesize_mission(env, suite.planner.robot_radius, suite.mission, seeds.mission);
  return {std::move(env), pts.anchor, std::move(pts.waypoints)};
}

struct TrialRecord {
  std::string planner;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  MissionReport report;
};

struct BenchmarkResult {
  /// Trial-major, planners in suite order within a trial.
  std::vector<TrialRecord> records;
  std::vector<std::pair<std::string, Metrics>> metrics;
};

/// Runs every planner on every trial. Trials are spread over `jobs` worker
/// threads; the result does not depend on `jobs`.
inline BenchmarkResult run_benchmark(const SuiteConfig &suite, int jobs = 1) {
  if (suite.planners.empty()) throw InvalidArgument("no planner enabled");
  if (suite.trials < 1) throw InvalidArgument("trials must be >= 1");
  suite.planner.validate();
  std::vector<PlannerFn> fns;
  for (const auto &name : suite.planners) fns.push_back(planner_by_name(name));

  const auto n_trials = static_cast<std::size_t>(suite.trials);
  const std::size_t n_planners = fns.size();
  BenchmarkResult out;
  out.records.resize(n_trials * n_planners);

  auto run_trial = [&](std::size_t t) {
    const TrialSeeds seeds = trial_seeds(suite.seed, t);
    const Mission mission = make_trial_mission(suite, seeds);
    for (std::size_t p = 0; p < n_planners; ++p) {
      TrialRecord &rec = out.records[t * n_planners + p];
      rec.planner = suite.planners[p];
      rec.trial = t;
      rec.seed = seeds.trial;
      rec.report = run_mission(mission, suite.planner, seeds.planner, fns[p], suite.planners[p]);
    }
  };
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, suite.trials));
  if (workers == 1) {
    for (std::size_t t = 0; t < n_trials; ++t) run_trial(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < n_trials; t += workers) run_trial(t);
      });
  }

  for (std::size_t p = 0; p < n_planners; ++p) {
    std::vector<MissionReport> reports;
    for (std::size_t t = 0; t < n_trials; ++t) reports.push_back(out.records[t * n_planners + p].report);
    out.metrics.emplace_back(suite.planners[p], compute_metrics(reports));
  }
  return out;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline constexpr const char *kCsvHeader = "planner,trial,seed,reach,tangle_free,time_s,topo_energy,length,smoothness";

/// One row per (trial, planner). Wall-clock time is written only when
/// `with_timing` is set, so the default output is reproducible byte-for-byte.
inline void write_csv(std::ostream &os, const BenchmarkResult &result, bool with_timing = false) {
  os << kCsvHeader << '\n';
  for (const auto &rec : result.records) {
    const MissionReport &r = rec.report;
    os << rec.planner << ',' << rec.trial << ',' << rec.seed << ',' << (r.reached ? 1 : 0) << ','
       << (r.tangle_free ? 1 : 0) << ',' << format_number(with_timing ? r.time_s : std::numeric_limits<double>::quiet_NaN())
       << ',' << format_number(r.topo_energy) << ',' << format_number(r.length) << ',' << format_number(r.smoothness)
       << '\n';
  }
}

} // namespace tmpd
