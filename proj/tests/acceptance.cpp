// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "tmpd/bench.hpp"
#include "tmpd/frontend.hpp"
#include "tmpd/topology.hpp"

using namespace tmpd;
namespace fs = std::filesystem;

namespace {

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &why) {
    if (!ok && pass) detail = why;
    pass = pass && ok;
  }
};

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<Point2> random_polyline(std::mt19937_64 &rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

double max_rel_error(const std::vector<Point2> &a, const std::vector<Point2> &b) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max({scale, std::abs(b[i].x), std::abs(b[i].y)});
    err = std::max({err, std::abs(a[i].x - b[i].x), std::abs(a[i].y - b[i].y)});
  }
  return scale > 0.0 ? err / scale : err;
}

Outcome winding_calculus() {
  Outcome out;
  Stopwatch sw;
  const Trajectory sq{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
  out.require(std::abs(winding_number(sq, {0.1, -0.2}) - 1.0) < 1e-9, "closed CCW loop is not one turn");

  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  while (cases < 1000) {
    const auto p1 = random_polyline(rng, 5);
    auto p2 = random_polyline(rng, 4);
    p2.insert(p2.begin(), p1.back());
    const Point2 c{u(rng), u(rng)};
    std::vector<Point2> joined(p1);
    joined.insert(joined.end(), p2.begin() + 1, p2.end());
    const std::vector<Point2> rev(p1.rbegin(), p1.rend());
    try {
      worst = std::max(worst, std::abs(winding_number(rev, c) + winding_number(p1, c)));
      worst = std::max(worst, std::abs(winding_number(joined, c) - winding_number(p1, c) - winding_number(p2, c)));
      ++cases;
    } catch (const CenterOnCurve &) {
    }
  }
  out.require(worst < 1e-9, fmt("additivity/antisymmetry error %.3g", worst));

  double quad_worst = 0.0;
  for (int k = 0; k < 1000;) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    if (point_segment_distance(c, a, b) < 0.02) continue;
    const std::vector<Point2> seg{a, b};
    quad_worst = std::max(quad_worst, std::abs(winding_number(seg, c) - oracle::quad_segment_turns(a, b, c)));
    ++k;
  }
  out.require(quad_worst < 1e-7, fmt("quadrature disagreement %.3g", quad_worst));
  out.require(sw.seconds() < 5.0, fmt("runtime %.1f s", sw.seconds()));
  if (out.pass) out.detail = fmt("1000 cases, worst %.2g, quadrature worst %.2g, %.2f s", worst, quad_worst, sw.seconds());
  return out;
}

Outcome curve_shortening() {
  Outcome out;
  Stopwatch sw;
  std::mt19937_64 rng(2002);
  int checked = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; checked < 200; ++seed) {
    const auto env = generate_environment(EnvGenConfig{}, derive_seed(seed, {20}));
    const auto m = synthesize_mission(env, 0.05, MissionGenConfig{1}, derive_seed(seed, {21}));
    const auto detour = oracle::random_detour(env, m.anchor, m.waypoints[0], 0.05, rng, 1 + static_cast<int>(seed % 4));
    if (!detour) continue;
    const Trajectory taut = taut_configuration(*detour, env, 0.05);
    out.require(trajectory_collision_free(env, taut, 0.05), "taut output collides");
    out.require(homotopy_signature(taut, *detour, env).is_zero(), "taut output changed homotopy class");
    out.require(taut_configuration(taut, env, 0.05) == taut, "taut is not idempotent");
    const auto ref = oracle::shortest_homotopic_length(env, *detour, 0.05);
    out.require(ref.has_value(), "oracle found no path");
    if (ref) worst = std::max(worst, std::abs(taut.length() - *ref) / *ref);
    ++checked;
  }
  out.require(worst <= 0.02, fmt("length error %.4f", worst));
  out.require(sw.seconds() < 120.0, fmt("runtime %.1f s", sw.seconds()));
  if (out.pass) out.detail = fmt("200 detours, worst length error %.4f, %.1f s", worst, sw.seconds());
  return out;
}

Outcome lazy_selection() {
  Outcome out;
  Stopwatch sw;
  const BackendConfig cfg;
  int checked = 0, rank1 = 0;
  for (std::uint64_t seed = 10000; checked < 200; ++seed) {
    const auto sc = oracle::backend_scenario(seed);
    if (!sc) continue;
    SelectionResult lazy;
    try {
      lazy = select_trajectory(sc->pool, sc->history, sc->env, cfg);
    } catch (const EmptyPool &) {
      continue;
    }
    const auto brute = oracle::exhaustive_select(sc->pool, sc->history, sc->env, cfg);
    out.require(lazy.chosen == brute.chosen, "chosen trajectory differs, seed " + std::to_string(seed));
    out.require(lazy.safe == brute.safe, "safe flag differs, seed " + std::to_string(seed));
    if (brute.safe && brute.chosen == lazy.ranked.front().trajectory) {
      ++rank1;
      out.require(lazy.evaluations == 1, "rank-1 safe but evaluations > 1, seed " + std::to_string(seed));
    }
    ++checked;
  }
  out.require(sw.seconds() < 120.0, fmt("runtime %.1f s", sw.seconds()));
  if (out.pass) out.detail = fmt("200 scenarios, %g with safe rank-1, %.1f s", rank1, sw.seconds());
  return out;
}

// Rebuilds the global path from the committed segments and checks every ok
// step with a fresh shortening pass and quadrature windings.
Outcome constraint_soundness(const SuiteConfig &suite, const BenchmarkResult &result) {
  Outcome out;
  std::size_t ok_steps = 0;
  double worst = 0.0;
  for (const auto &rec : result.records) {
    const Mission mission = make_trial_mission(suite, trial_seeds(suite.seed, rec.trial));
    std::vector<Point2> global{mission.anchor};
    for (const auto &step : rec.report.steps) {
      if (!step.segment) break;
      const auto &pts = step.segment->waypoints();
      global.insert(global.end(), pts.begin() + 1, pts.end());
      if (step.status != StepStatus::ok) continue;
      ++ok_steps;
      const Trajectory taut = taut_configuration(Trajectory(global), mission.env, suite.planner.robot_radius);
      const std::vector<Point2> taut_pts(taut.waypoints().begin(), taut.waypoints().end());
      double w = 0.0;
      for (const auto &o : mission.env.obstacles()) w = std::max(w, std::abs(oracle::quad_winding(taut_pts, o.center())));
      worst = std::max(worst, w);
      out.require(w < suite.planner.w_th,
                  rec.planner + " trial " + std::to_string(rec.trial) + fmt(" ok step at |W| %.4f", w));
    }
  }
  if (out.pass) out.detail = std::to_string(ok_steps) + " ok steps re-verified, worst |W| " + fmt("%.4f", worst);
  return out;
}

const Metrics &metrics_of(const BenchmarkResult &r, const std::string &name) {
  for (const auto &[n, m] : r.metrics)
    if (n == name) return m;
  throw InvalidArgument("no metrics for " + name);
}

std::string csv_of(const BenchmarkResult &r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

Outcome benchmark_direction(const SuiteConfig &suite, const BenchmarkResult &result, double seconds) {
  Outcome out;
  const Metrics &full = metrics_of(result, "tmpd");
  const Metrics &ablation = metrics_of(result, "no_backend");
  out.require(full.tangle_free_rate >= ablation.tangle_free_rate + 30.0,
              fmt("tangle-free %.1f%% vs ablation %.1f%%", full.tangle_free_rate, ablation.tangle_free_rate));
  out.require(full.collision_free_reach == 100.0, fmt("reach %.1f%%", full.collision_free_reach));
  out.require(seconds < 1800.0, fmt("runtime %.1f s", seconds));
  const bool same = csv_of(run_benchmark(suite, 4)) == csv_of(result);
  out.require(same, "CSV differs between --jobs 1 and --jobs 4");
  if (out.pass)
    out.detail = fmt("tmpd %.1f%% vs no_backend %.1f%% tangle-free, reach %.1f%%", full.tangle_free_rate,
                     ablation.tangle_free_rate, full.collision_free_reach) +
                 fmt(", %.1f s, jobs-invariant", seconds);
  return out;
}

Outcome ablation_monotonicity(const SuiteConfig &suite, const BenchmarkResult &result) {
  Outcome out;
  const auto sc = two_corridor_scenario();
  std::vector<double> means;
  for (double extra : {0.5, 0.8, 1.8}) {
    FrontendConfig cfg;
    cfg.sigma_extra = extra;
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto pool = generate_candidates(sc.start, sc.goal, sc.env, cfg, seed);
      std::set<HomotopySignature> sigs;
      for (const auto &t : pool.trajectories) sigs.insert(homotopy_signature(t, pool.trajectories.front(), sc.env));
      total += static_cast<double>(sigs.size());
    }
    means.push_back(total / 100.0);
  }
  out.require(means[0] <= means[1] && means[1] <= means[2],
              fmt("mean signatures %.2f, %.2f, %.2f", means[0], means[1], means[2]));

  SuiteConfig low = suite;
  low.planners = {"tmpd"};
  low.planner.frontend.sigma_extra = 0.5;
  const double rate_low = metrics_of(run_benchmark(low), "tmpd").tangle_free_rate;
  const double rate_default = metrics_of(result, "tmpd").tangle_free_rate;
  out.require(rate_default >= rate_low, fmt("tangle-free %.1f%% at 0.8 vs %.1f%% at 0.5", rate_default, rate_low));
  if (out.pass)
    out.detail = fmt("mean signatures %.2f <= %.2f <= %.2f", means[0], means[1], means[2]) +
                 fmt("; tangle-free %.1f%% at 0.8 vs %.1f%% at 0.5", rate_default, rate_low);
  return out;
}

Outcome baselines() {
  Outcome out;
  const Environment toy(Rect{}, {Obstacle{Circle{{-0.2, 0.1}, 0.22}}, Obstacle{Box{{0.45, -0.35}, {0.12, 0.3}}},
                                 Obstacle{Circle{{0.4, 0.55}, 0.12}}});
  AStarConfig cfg;
  cfg.grid_res = 0.1;
  cfg.robot_radius = 0.02;
  const std::vector<std::pair<Point2, Point2>> queries{
      {{-0.85, -0.85}, {0.85, 0.85}}, {{-0.8, 0.6}, {0.8, -0.7}}, {{0.0, -0.8}, {0.1, 0.85}}, {{0.85, 0.0}, {-0.85, 0.0}}};
  const std::vector<WindingVector> histories{WindingVector{{0.0, 0.0, 0.0}}, WindingVector{{0.8, 0.0, 0.0}},
                                             WindingVector{{-0.7, 0.3, 0.0}}, WindingVector{{0.0, 0.0, 0.9}}};
  int grid_cases = 0;
  for (const auto &[s, g] : queries) {
    for (const auto &hist : histories) {
      SearchStats st;
      const auto path = topo_astar(toy, s, g, hist, cfg, 0.95, &st);
      const auto ref = oracle::augmented_dijkstra(toy, s, g, hist, cfg.grid_res, cfg.robot_radius, 0.95);
      out.require(path.has_value() == ref.has_value(), "A* and Dijkstra disagree on feasibility");
      if (path && ref) out.require(std::abs(st.cost - *ref) < 1e-9, fmt("A* cost %.6f vs Dijkstra %.6f", st.cost, *ref));
      ++grid_cases;
    }
  }

  int verified = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto env = generate_environment(EnvGenConfig{}, derive_seed(seed, {1}));
    const auto m = synthesize_mission(env, 0.05, MissionGenConfig{1}, derive_seed(seed, {2}));
    WindingVector hist{std::vector<double>(env.size(), 0.0)};
    if (seed % 2 == 1 && env.size() > 0) hist.values[seed % env.size()] = 0.7;
    const auto path = topo_rrt(env, m.anchor, m.waypoints[0], hist, RrtConfig{}, 0.95, seed);
    if (path && oracle::reverify_path(env, *path, m.anchor, m.waypoints[0], hist, 0.05, 0.95)) ++verified;
  }
  out.require(verified == 100, fmt("topo_rrt re-verified %g/100", verified));
  if (out.pass) out.detail = fmt("%g grid queries match Dijkstra, topo_rrt %g/100 re-verified", grid_cases, verified);
  return out;
}

Outcome gradient_checks() {
  Outcome out;
  const auto env = generate_environment(EnvGenConfig{}, 8);
  std::mt19937_64 rng(8008);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  double worst_c = 0.0, worst_s = 0.0;
  for (int checked = 0; checked < 100;) {
    std::vector<Point2> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({u(rng), u(rng)});
    bool smooth = true;
    for (Point2 p : pts) {
      const double d = signed_distance(env, p);
      smooth = smooth && d > -0.03 && std::abs(d - 0.07) > 1e-3;
    }
    if (!smooth) continue;
    auto f = [&](const std::vector<Point2> &q) { return collision_cost(q, env, 0.05).cost; };
    worst_c = std::max(worst_c, max_rel_error(collision_cost(pts, env, 0.05).gradient, oracle::fd_gradient(f, pts, 1e-6)));
    ++checked;
  }
  for (int k = 0; k < 100; ++k) {
    const auto pts = random_polyline(rng, 16);
    auto f = [](const std::vector<Point2> &q) { return smoothness_cost(q).cost; };
    worst_s = std::max(worst_s, max_rel_error(smoothness_cost(pts).gradient, oracle::fd_gradient(f, pts, 1e-6)));
  }
  out.require(worst_c < 1e-4, fmt("collision gradient error %.3g", worst_c));
  out.require(worst_s < 1e-4, fmt("smoothness gradient error %.3g", worst_s));
  if (out.pass) out.detail = fmt("worst relative error collision %.2g, smoothness %.2g", worst_c, worst_s);
  return out;
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome bench_determinism(const std::string &cli, const fs::path &workdir) {
  Outcome out;
  std::string outputs[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path csv = workdir / ("bench_" + std::to_string(run) + ".csv");
    const std::string cmd = "\"" + cli + "\" bench --trials 20 --seed 424242 --planners tmpd,no_backend --csv \"" +
                            csv.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    out.require(rc == 0, "bench exited with status " + std::to_string(rc));
    outputs[run] = slurp(csv);
  }
  out.require(!outputs[0].empty(), "empty CSV");
  out.require(outputs[0] == outputs[1], "CSV differs between reruns");
  if (out.pass) out.detail = std::to_string(outputs[0].size()) + " bytes, identical on rerun";
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::string cli;
  std::string workdir = "acceptance_work";
  app.add_option("--cli", cli, "Path to the tmpd_cli binary")->required();
  app.add_option("--workdir", workdir, "Scratch directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  int failures = 0;
  auto report = [&](int id, const char *name, const Outcome &o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  };
  auto guarded = [&](int id, const char *name, auto &&fn) {
    try {
      report(id, name, fn());
    } catch (const std::exception &e) {
      report(id, name, Outcome{false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, "winding calculus", winding_calculus);
  guarded(2, "curve shortening", curve_shortening);
  guarded(3, "lazy selection", lazy_selection);

  const SuiteConfig suite;
  BenchmarkResult result;
  double bench_seconds = 0.0;
  bool have_bench = false;
  try {
    Stopwatch sw;
    result = run_benchmark(suite, 1);
    bench_seconds = sw.seconds();
    have_bench = true;
  } catch (const std::exception &e) {
    std::cerr << "default benchmark failed: " << e.what() << '\n';
  }
  auto needs_bench = [&](auto &&fn) {
    return [&, fn] { return have_bench ? fn() : Outcome{false, "default benchmark did not run"}; };
  };
  guarded(4, "constraint soundness", needs_bench([&] { return constraint_soundness(suite, result); }));
  guarded(5, "benchmark direction", needs_bench([&] { return benchmark_direction(suite, result, bench_seconds); }));
  guarded(6, "ablation monotonicity", needs_bench([&] { return ablation_monotonicity(suite, result); }));
  guarded(7, "baselines", baselines);
  guarded(8, "gradient checks", gradient_checks);
  guarded(9, "bench determinism", [&] { return bench_determinism(cli, workdir); });
  return failures == 0 ? 0 : 1;
}
