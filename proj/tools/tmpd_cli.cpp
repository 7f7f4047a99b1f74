// tmpd command-line front end: plan, mission, bench, render, gen-env.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tmpd/bench.hpp"
#include "tmpd/config.hpp"
#include "tmpd/io/json.hpp"
#include "tmpd/lifelong.hpp"
#include "tmpd/scenario.hpp"
#include "tmpd/svg.hpp"

namespace {

using tmpd::io::Json;

enum Exit : int {
  kOk = 0,
  kUnsafe = 2,
  kFailed = 3,
  kParse = 10,
  kIo = 11,
  kInvalid = 12,
  kUsage = 13,
  kInternal = 14,
};

// Command-line overrides; unset options leave the config file value alone.
struct Overrides {
  std::optional<double> w_th, robot_radius, lambda, alpha, sigma_extra, tau_guide;
  std::optional<int> n_guide, n_samples, horizon, diffusion_steps;

  void add_to(CLI::App *app) {
    app->add_option("--w-th", w_th, "Entanglement threshold W_th (default 0.95)");
    app->add_option("--robot-radius", robot_radius, "Robot radius in meters (default 0.05)");
    app->add_option("--lambda", lambda, "Length weight of the heuristic cost (default 0.5)");
    app->add_option("--alpha", alpha, "Barrier gain of the topological energy (default 1.0)");
    app->add_option("--sigma-extra", sigma_extra, "Langevin noise amplification (default 0.8)");
    app->add_option("--tau-guide", tau_guide, "Guidance onset fraction (default 0.1)");
    app->add_option("--n-guide", n_guide, "Number of guided steps (default 10)");
    app->add_option("--n-samples", n_samples, "Candidates per pool (default 70)");
    app->add_option("--horizon", horizon, "Waypoints per candidate (default 64)");
    app->add_option("--diffusion-steps", diffusion_steps, "Reverse steps (default 25)");
  }

  void apply(tmpd::PlannerConfig &c) const {
    if (w_th) c.w_th = *w_th;
    if (robot_radius) c.robot_radius = *robot_radius;
    if (lambda) c.lambda = *lambda;
    if (alpha) c.alpha = *alpha;
    if (sigma_extra) c.frontend.sigma_extra = *sigma_extra;
    if (tau_guide) c.frontend.tau_guide = *tau_guide;
    if (n_guide) c.frontend.n_guide = *n_guide;
    if (n_samples) c.frontend.n_samples = *n_samples;
    if (horizon) c.frontend.horizon = *horizon;
    if (diffusion_steps) c.frontend.diffusion_steps = *diffusion_steps;
    c.validate();
  }
};

tmpd::PlannerConfig load_config(const std::string &path, const Overrides &ov) {
  tmpd::PlannerConfig cfg;
  if (!path.empty()) cfg = tmpd::io::planner_config_from_json(tmpd::io::read_json_file(path));
  ov.apply(cfg);
  return cfg;
}

void emit(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    tmpd::io::write_text_file(path, text);
}

int status_code(const std::vector<tmpd::StepResult> &steps, std::size_t expected) {
  bool unsafe = false;
  for (const auto &s : steps) {
    if (s.status == tmpd::StepStatus::failed) return kFailed;
    unsafe = unsafe || s.status == tmpd::StepStatus::fallback_unsafe;
  }
  if (steps.size() < expected) return kFailed;
  return unsafe ? kUnsafe : kOk;
}

std::vector<tmpd::Layer> mission_layers(const tmpd::MissionReport &r) {
  static const char *palette[] = {"#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  std::vector<tmpd::Layer> layers;
  for (std::size_t i = 0; i < r.steps.size(); ++i)
    if (r.steps[i].segment) layers.push_back({*r.steps[i].segment, {palette[i % 6], 2.0, 1.0}});
  return layers;
}

tmpd::PlannerFn resolve_planner(const std::string &name) { return tmpd::planner_by_name(name); }

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"tmpd: tether-safe lifelong planning tools"};
  app.require_subcommand(1);
  int jobs = 1;

  // plan
  auto *plan = app.add_subcommand("plan", "Plan a single step between two points");
  std::string env_file, config_file, out_file, svg_file;
  std::vector<double> start, goal;
  std::uint64_t seed = 0;
  Overrides ov_plan;
  plan->add_option("--env", env_file, "Environment JSON")->required();
  plan->add_option("--start", start, "Start x y")->required()->expected(2);
  plan->add_option("--goal", goal, "Goal x y")->required()->expected(2);
  plan->add_option("--config", config_file, "Planner config JSON");
  plan->add_option("--seed", seed, "Master seed");
  plan->add_option("--out", out_file, "Segment JSON output (default stdout)");
  plan->add_option("--svg", svg_file, "Optional SVG rendering");
  plan->add_option("--jobs", jobs, "Worker threads (outputs do not depend on it)");
  ov_plan.add_to(plan);

  // mission
  auto *mission = app.add_subcommand("mission", "Run a lifelong multi-waypoint mission");
  std::string mission_file, mission_out, mission_svg, mission_planner = "tmpd";
  std::uint64_t mission_seed = 0;
  bool mission_timing = false;
  Overrides ov_mission;
  std::string mission_config;
  mission->add_option("--mission", mission_file, "Mission JSON")->required();
  mission->add_option("--config", mission_config, "Planner config JSON");
  mission->add_option("--seed", mission_seed, "Master seed");
  mission->add_option("--planner", mission_planner, "tmpd, no_backend, topo_astar or topo_rrt");
  mission->add_option("--out", mission_out, "Report JSON output (default stdout)");
  mission->add_option("--svg", mission_svg, "Optional SVG rendering");
  mission->add_flag("--timing", mission_timing, "Include wall-clock timings in the report");
  mission->add_option("--jobs", jobs, "Worker threads (outputs do not depend on it)");
  ov_mission.add_to(mission);

  // bench
  auto *bench = app.add_subcommand("bench", "Run the seeded multi-planner benchmark");
  std::string suite_file, csv_out, json_out;
  std::vector<std::string> planners;
  std::optional<int> trials;
  std::optional<std::uint64_t> bench_seed;
  bool bench_timing = false;
  Overrides ov_bench;
  bench->add_option("--suite", suite_file, "Suite config JSON");
  bench->add_option("--planners", planners, "Planners to run (comma separated)")->delimiter(',');
  bench->add_option("--trials", trials, "Number of trials (default 100)");
  bench->add_option("--seed", bench_seed, "Master seed");
  bench->add_option("--csv", csv_out, "CSV output (default stdout)");
  bench->add_option("--json", json_out, "JSON summary output");
  bench->add_flag("--timing", bench_timing, "Write wall-clock timings (makes output nondeterministic)");
  bench->add_option("--jobs", jobs, "Worker threads (outputs do not depend on it)");
  ov_bench.add_to(bench);

  // render
  auto *render = app.add_subcommand("render", "Render an environment, mission or mission report to SVG");
  std::string render_env, render_mission, render_report, render_out;
  render->add_option("--env", render_env, "Environment JSON");
  render->add_option("--mission", render_mission, "Mission JSON (environment and waypoints)");
  render->add_option("--report", render_report, "Mission report JSON whose segments are drawn");
  render->add_option("--out", render_out, "SVG output")->required();

  // gen-env
  auto *gen = app.add_subcommand("gen-env", "Generate a seeded environment and optional mission");
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_mission_out;
  int gen_waypoints = 5;
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Environment JSON output (default stdout)");
  gen->add_option("--mission-out", gen_mission_out, "Also write a mission for this environment");
  gen->add_option("--waypoints", gen_waypoints, "Mission waypoint count (default 5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*plan) {
      const tmpd::PlannerConfig cfg = load_config(config_file, ov_plan);
      const tmpd::Environment env = tmpd::io::environment_from_json(tmpd::io::read_json_file(env_file));
      const tmpd::Point2 s{start[0], start[1]}, g{goal[0], goal[1]};
      tmpd::Mission m{env, s, {g}};
      m.validate(cfg.robot_radius);
      const tmpd::TetherHistory history(s, env);
      tmpd::StepResult step = tmpd::plan_step(history, g, env, cfg, tmpd::derive_seed(seed, {0}), jobs);
      Json j = tmpd::io::to_json(step, false);
      emit(out_file, j.dump(2) + "\n");
      if (!svg_file.empty()) {
        std::vector<tmpd::Layer> layers;
        if (step.segment) layers.push_back({*step.segment, {}});
        tmpd::render_svg(env, layers, svg_file, {{s, tmpd::MarkerKind::anchor}, {g, tmpd::MarkerKind::goal}});
      }
      return status_code({step}, 1);
    }
    if (*mission) {
      const tmpd::PlannerConfig cfg = load_config(mission_config, ov_mission);
      const tmpd::Mission m = tmpd::io::mission_from_json(tmpd::io::read_json_file(mission_file));
      const tmpd::PlannerFn fn = resolve_planner(mission_planner);
      const tmpd::MissionReport report = tmpd::run_mission(m, cfg, mission_seed, fn, mission_planner, jobs);
      emit(mission_out, tmpd::io::to_json(report, mission_timing).dump(2) + "\n");
      if (!mission_svg.empty()) {
        std::vector<tmpd::Marker> markers{{m.anchor, tmpd::MarkerKind::anchor}};
        for (auto p : m.waypoints) markers.push_back({p, tmpd::MarkerKind::goal});
        tmpd::render_svg(m.env, mission_layers(report), mission_svg, markers);
      }
      return status_code(report.steps, m.waypoints.size());
    }
    if (*bench) {
      tmpd::SuiteConfig suite;
      if (!suite_file.empty()) suite = tmpd::io::suite_config_from_json(tmpd::io::read_json_file(suite_file));
      if (!planners.empty()) suite.planners = planners;
      if (trials) suite.trials = *trials;
      if (bench_seed) suite.seed = *bench_seed;
      ov_bench.apply(suite.planner);
      for (const auto &p : suite.planners) resolve_planner(p);
      const tmpd::BenchmarkResult result = tmpd::run_benchmark(suite, jobs);
      std::ostringstream csv;
      tmpd::write_csv(csv, result, bench_timing);
      emit(csv_out, csv.str());
      if (!json_out.empty())
        tmpd::io::write_text_file(json_out, tmpd::io::to_json(result, suite, bench_timing).dump(2) + "\n");
      return kOk;
    }
    if (*render) {
      std::optional<tmpd::Environment> env;
      std::vector<tmpd::Marker> markers;
      if (!render_mission.empty()) {
        const tmpd::Mission m = tmpd::io::mission_from_json(tmpd::io::read_json_file(render_mission));
        env = m.env;
        markers.push_back({m.anchor, tmpd::MarkerKind::anchor});
        for (auto p : m.waypoints) markers.push_back({p, tmpd::MarkerKind::goal});
      }
      if (!render_env.empty()) env = tmpd::io::environment_from_json(tmpd::io::read_json_file(render_env));
      if (!env) throw tmpd::InvalidArgument("render needs --env or --mission");
      std::vector<tmpd::Layer> layers;
      if (!render_report.empty()) {
        const Json rep = tmpd::io::read_json_file(render_report);
        if (!rep.is_object() || !rep.contains("steps") || !rep["steps"].is_array())
          throw tmpd::ParseError("report: missing steps");
        static const char *palette[] = {"#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
        std::size_t i = 0;
        for (const auto &s : rep["steps"]) {
          if (s.contains("segment") && !s["segment"].is_null())
            layers.push_back({tmpd::io::trajectory_from_json(s["segment"], "report.segment"), {palette[i % 6], 2.0, 1.0}});
          ++i;
        }
      }
      tmpd::render_svg(*env, layers, render_out, markers);
      return kOk;
    }
    if (*gen) {
      const tmpd::EnvGenConfig ecfg;
      const tmpd::Environment env = tmpd::generate_environment(ecfg, gen_seed);
      emit(gen_out, tmpd::io::to_json(env).dump(2) + "\n");
      if (!gen_mission_out.empty()) {
        tmpd::MissionGenConfig mcfg;
        mcfg.n_waypoints = gen_waypoints;
        const tmpd::MissionPoints pts = tmpd::synthesize_mission(env, tmpd::PlannerConfig{}.robot_radius, mcfg, gen_seed);
        const tmpd::Mission m{env, pts.anchor, pts.waypoints};
        tmpd::io::write_text_file(gen_mission_out, tmpd::io::to_json(m).dump(2) + "\n");
      }
      return kOk;
    }
  } catch (const tmpd::ParseError &e) {
    std::cerr << "tmpd: parse error: " << e.what() << '\n';
    return kParse;
  } catch (const tmpd::IoError &e) {
    std::cerr << "tmpd: io error: " << e.what() << '\n';
    return kIo;
  } catch (const tmpd::Error &e) {
    std::cerr << "tmpd: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception &e) {
    std::cerr << "tmpd: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
