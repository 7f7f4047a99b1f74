#pragma once

// JSON encodings of environments, missions, configuration and reports.

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmpd/backend.hpp"
#include "tmpd/bench.hpp"
#include "tmpd/config.hpp"
#include "tmpd/errors.hpp"
#include "tmpd/geometry2d.hpp"
#include "tmpd/lifelong.hpp"
#include "tmpd/scenario.hpp"

namespace tmpd::io {

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string &text, const std::string &what = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline Json read_json_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_json(ss.str(), path);
}

inline void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path + "'");
}

/// JSON numbers for finite values, null otherwise.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

namespace detail {

// Reads known keys of one object and rejects any other key.
class ObjectReader {
public:
  ObjectReader(const Json &j, std::string context) : j_(j), ctx_(std::move(context)) {
    if (!j_.is_object()) throw ParseError(ctx_ + ": expected an object");
  }

  template <class T>
  void get(const char *key, T &out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ParseError(ctx_ + "." + key + ": expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ParseError(ctx_ + "." + key + ": expected an integer");
      }
      out = it->template get<T>();
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(ctx_ + "." + key + ": " + e.what());
    }
  }

  const Json *child(const char *key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ParseError(ctx_ + ": unknown key '" + it.key() + "'");
  }

private:
  const Json &j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

inline double as_number(const Json &j, const std::string &ctx) {
  if (!j.is_number()) throw ParseError(ctx + ": expected a number");
  return j.get<double>();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Geometry

inline Json to_json(Point2 p) { return Json::array({p.x, p.y}); }

inline Point2 point_from_json(const Json &j, const std::string &ctx = "point") {
  if (!j.is_array() || j.size() != 2) throw ParseError(ctx + ": expected [x, y]");
  return {detail::as_number(j[0], ctx), detail::as_number(j[1], ctx)};
}

inline Json to_json(const Trajectory &tau) {
  Json a = Json::array();
  for (Point2 p : tau.waypoints()) a.push_back(to_json(p));
  return a;
}

inline Json to_json(std::span<const Point2> pts) {
  Json a = Json::array();
  for (Point2 p : pts) a.push_back(to_json(p));
  return a;
}

inline Trajectory trajectory_from_json(const Json &j, const std::string &ctx = "trajectory") {
  if (!j.is_array()) throw ParseError(ctx + ": expected an array of points");
  std::vector<Point2> pts;
  for (const auto &p : j) pts.push_back(point_from_json(p, ctx));
  try {
    return Trajectory(std::move(pts));
  } catch (const InvalidArgument &e) {
    throw ParseError(ctx + ": " + e.what());
  }
}

inline Json to_json(const Environment &env) {
  Json j;
  const Rect &b = env.bounds();
  j["bounds"] = Json::array({b.min.x, b.min.y, b.max.x, b.max.y});
  Json obs = Json::array();
  for (const auto &o : env.obstacles()) {
    Json e;
    if (const auto *c = std::get_if<Circle>(&o.shape)) {
      e["type"] = "circle";
      e["center"] = to_json(c->center);
      e["radius"] = c->radius;
    } else {
      const Box &bx = std::get<Box>(o.shape);
      e["type"] = "box";
      e["center"] = to_json(bx.center);
      e["half_extents"] = to_json(bx.half_extents);
    }
    obs.push_back(std::move(e));
  }
  j["obstacles"] = std::move(obs);
  return j;
}

inline Environment environment_from_json(const Json &j) {
  detail::ObjectReader r(j, "environment");
  const Json *bounds = r.child("bounds");
  const Json *obstacles = r.child("obstacles");
  r.finish();
  Rect rect;
  if (bounds) {
    if (!bounds->is_array() || bounds->size() != 4) throw ParseError("environment.bounds: expected [xmin,ymin,xmax,ymax]");
    rect = {{detail::as_number((*bounds)[0], "bounds"), detail::as_number((*bounds)[1], "bounds")},
            {detail::as_number((*bounds)[2], "bounds"), detail::as_number((*bounds)[3], "bounds")}};
  }
  std::vector<Obstacle> obs;
  if (obstacles) {
    if (!obstacles->is_array()) throw ParseError("environment.obstacles: expected an array");
    for (std::size_t i = 0; i < obstacles->size(); ++i) {
      const std::string ctx = "environment.obstacles[" + std::to_string(i) + "]";
      const Json &e = (*obstacles)[i];
      if (!e.is_object() || !e.contains("type") || !e["type"].is_string()) throw ParseError(ctx + ": missing type");
      const std::string type = e["type"].get<std::string>();
      if (!e.contains("center")) throw ParseError(ctx + ": missing center");
      const Point2 c = point_from_json(e["center"], ctx + ".center");
      if (type == "circle") {
        if (!e.contains("radius")) throw ParseError(ctx + ": missing radius");
        obs.push_back({Circle{c, detail::as_number(e["radius"], ctx + ".radius")}});
      } else if (type == "box") {
        if (!e.contains("half_extents")) throw ParseError(ctx + ": missing half_extents");
        obs.push_back({Box{c, point_from_json(e["half_extents"], ctx + ".half_extents")}});
      } else {
        throw ParseError(ctx + ": unknown obstacle type '" + type + "'");
      }
    }
  }
  try {
    return Environment(rect, std::move(obs));
  } catch (const InvalidArgument &e) {
    throw ParseError(std::string("environment: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Missions

inline Json to_json(const Mission &m) {
  Json j;
  j["environment"] = to_json(m.env);
  j["anchor"] = to_json(m.anchor);
  Json w = Json::array();
  for (Point2 p : m.waypoints) w.push_back(to_json(p));
  j["waypoints"] = std::move(w);
  return j;
}

inline Mission mission_from_json(const Json &j) {
  detail::ObjectReader r(j, "mission");
  const Json *env = r.child("environment");
  const Json *anchor = r.child("anchor");
  const Json *waypoints = r.child("waypoints");
  r.finish();
  if (!env || !anchor || !waypoints) throw ParseError("mission: environment, anchor and waypoints are required");
  Mission m{environment_from_json(*env), point_from_json(*anchor, "mission.anchor"), {}};
  if (!waypoints->is_array()) throw ParseError("mission.waypoints: expected an array");
  for (const auto &p : *waypoints) m.waypoints.push_back(point_from_json(p, "mission.waypoints"));
  return m;
}

// ---------------------------------------------------------------------------
// Configuration

inline Json to_json(const PlannerConfig &c) {
  Json j;
  j["w_th"] = c.w_th;
  j["robot_radius"] = c.robot_radius;
  j["lambda"] = c.lambda;
  j["alpha"] = c.alpha;
  j["lambda_s"] = c.lambda_s;
  j["lambda_l"] = c.lambda_l;
  j["resample_rounds"] = c.resample_rounds;
  j["escalation"] = c.escalation;
  const FrontendConfig &f = c.frontend;
  j["frontend"] = {{"horizon", f.horizon},
                   {"diffusion_steps", f.diffusion_steps},
                   {"sigma_max", f.sigma_max},
                   {"sigma_min", f.sigma_min},
                   {"sigma_extra", f.sigma_extra},
                   {"tau_guide", f.tau_guide},
                   {"n_guide", f.n_guide},
                   {"n_samples", f.n_samples},
                   {"lambda_collision", f.lambda_collision},
                   {"lambda_smooth", f.lambda_smooth},
                   {"grad_scale", f.grad_scale},
                   {"collision_margin", f.collision_margin},
                   {"shrink", f.shrink},
                   {"line_blend", f.line_blend},
                   {"smoothing_passes", f.smoothing_passes},
                   {"spectral_modes", f.spectral_modes}};
  j["taut"] = {{"max_sweeps", c.taut.max_sweeps},
               {"min_segment", c.taut.min_segment},
               {"improvement_tol", c.taut.improvement_tol},
               {"bisection_steps", c.taut.bisection_steps}};
  j["astar"] = {{"grid_res", c.astar.grid_res},
                {"robot_radius", c.astar.robot_radius},
                {"node_budget", c.astar.node_budget}};
  j["rrt"] = {{"max_iters", c.rrt.max_iters},
              {"step_size", c.rrt.step_size},
              {"robot_radius", c.rrt.robot_radius},
              {"goal_bias", c.rrt.goal_bias}};
  return j;
}

/// Overlays the keys present in `j` onto `base`.
inline PlannerConfig planner_config_from_json(const Json &j, PlannerConfig c = {}) {
  detail::ObjectReader r(j, "config");
  r.get("w_th", c.w_th);
  r.get("robot_radius", c.robot_radius);
  r.get("lambda", c.lambda);
  r.get("alpha", c.alpha);
  r.get("lambda_s", c.lambda_s);
  r.get("lambda_l", c.lambda_l);
  r.get("resample_rounds", c.resample_rounds);
  r.get("escalation", c.escalation);
  if (const Json *f = r.child("frontend")) {
    detail::ObjectReader fr(*f, "config.frontend");
    FrontendConfig &x = c.frontend;
    fr.get("horizon", x.horizon);
    fr.get("diffusion_steps", x.diffusion_steps);
    fr.get("sigma_max", x.sigma_max);
    fr.get("sigma_min", x.sigma_min);
    fr.get("sigma_extra", x.sigma_extra);
    fr.get("tau_guide", x.tau_guide);
    fr.get("n_guide", x.n_guide);
    fr.get("n_samples", x.n_samples);
    fr.get("lambda_collision", x.lambda_collision);
    fr.get("lambda_smooth", x.lambda_smooth);
    fr.get("grad_scale", x.grad_scale);
    fr.get("collision_margin", x.collision_margin);
    fr.get("shrink", x.shrink);
    fr.get("line_blend", x.line_blend);
    fr.get("smoothing_passes", x.smoothing_passes);
    fr.get("spectral_modes", x.spectral_modes);
    fr.finish();
  }
  if (const Json *t = r.child("taut")) {
    detail::ObjectReader tr(*t, "config.taut");
    tr.get("max_sweeps", c.taut.max_sweeps);
    tr.get("min_segment", c.taut.min_segment);
    tr.get("improvement_tol", c.taut.improvement_tol);
    tr.get("bisection_steps", c.taut.bisection_steps);
    tr.finish();
  }
  if (const Json *a = r.child("astar")) {
    detail::ObjectReader ar(*a, "config.astar");
    ar.get("grid_res", c.astar.grid_res);
    ar.get("robot_radius", c.astar.robot_radius);
    ar.get("node_budget", c.astar.node_budget);
    ar.finish();
  }
  if (const Json *q = r.child("rrt")) {
    detail::ObjectReader qr(*q, "config.rrt");
    qr.get("max_iters", c.rrt.max_iters);
    qr.get("step_size", c.rrt.step_size);
    qr.get("robot_radius", c.rrt.robot_radius);
    qr.get("goal_bias", c.rrt.goal_bias);
    qr.finish();
  }
  r.finish();
  try {
    c.validate();
  } catch (const InvalidArgument &e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

inline Json to_json(const EnvGenConfig &e) {
  const Rect &b = e.bounds;
  return {{"n_spheres_max", e.n_spheres_max},
          {"sphere_radius_min", e.sphere_radius_min},
          {"sphere_radius_max", e.sphere_radius_max},
          {"n_boxes_max", e.n_boxes_max},
          {"box_edge_min", e.box_edge_min},
          {"box_edge_max", e.box_edge_max},
          {"min_clearance", e.min_clearance},
          {"wall_clearance", e.wall_clearance},
          {"bounds", Json::array({b.min.x, b.min.y, b.max.x, b.max.y})},
          {"removal_probability", e.removal_probability},
          {"max_attempts", e.max_attempts}};
}

inline Json to_json(const SuiteConfig &s) {
  Json j;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  j["planners"] = s.planners;
  j["environment"] = to_json(s.env);
  j["mission"] = {{"n_waypoints", s.mission.n_waypoints},
                  {"min_separation", s.mission.min_separation},
                  {"clearance_margin", s.mission.clearance_margin},
                  {"max_attempts", s.mission.max_attempts}};
  j["planner"] = to_json(s.planner);
  return j;
}

inline SuiteConfig suite_config_from_json(const Json &j, SuiteConfig s = {}) {
  detail::ObjectReader r(j, "suite");
  r.get("trials", s.trials);
  r.get("seed", s.seed);
  r.get("planners", s.planners);
  if (const Json *e = r.child("environment")) {
    detail::ObjectReader er(*e, "suite.environment");
    er.get("n_spheres_max", s.env.n_spheres_max);
    er.get("sphere_radius_min", s.env.sphere_radius_min);
    er.get("sphere_radius_max", s.env.sphere_radius_max);
    er.get("n_boxes_max", s.env.n_boxes_max);
    er.get("box_edge_min", s.env.box_edge_min);
    er.get("box_edge_max", s.env.box_edge_max);
    er.get("min_clearance", s.env.min_clearance);
    er.get("wall_clearance", s.env.wall_clearance);
    er.get("removal_probability", s.env.removal_probability);
    er.get("max_attempts", s.env.max_attempts);
    if (const Json *b = er.child("bounds")) {
      if (!b->is_array() || b->size() != 4) throw ParseError("suite.environment.bounds: expected 4 numbers");
      s.env.bounds = {{detail::as_number((*b)[0], "bounds"), detail::as_number((*b)[1], "bounds")},
                      {detail::as_number((*b)[2], "bounds"), detail::as_number((*b)[3], "bounds")}};
    }
    er.finish();
  }
  if (const Json *m = r.child("mission")) {
    detail::ObjectReader mr(*m, "suite.mission");
    mr.get("n_waypoints", s.mission.n_waypoints);
    mr.get("min_separation", s.mission.min_separation);
    mr.get("clearance_margin", s.mission.clearance_margin);
    mr.get("max_attempts", s.mission.max_attempts);
    mr.finish();
  }
  if (const Json *p = r.child("planner")) s.planner = planner_config_from_json(*p, s.planner);
  r.finish();
  try {
    s.env.validate();
  } catch (const InvalidArgument &e) {
    throw ParseError(std::string("suite.environment: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const WindingVector &w) {
  Json a = Json::array();
  for (double v : w.values) a.push_back(v);
  return a;
}

inline Json to_json(const RankedCandidate &c) {
  Json j;
  j["pool_index"] = c.pool_index;
  j["signature"] = c.signature.loops;
  j["class_size"] = c.class_size;
  j["length"] = c.length;
  j["topo_energy"] = c.topo_energy;
  j["total_cost"] = c.total_cost;
  j["raw_max_winding"] = c.raw_max_winding;
  j["taut_max_winding"] = c.taut_max_winding ? number(*c.taut_max_winding) : Json(nullptr);
  j["taut_length"] = c.taut ? Json(c.taut->length()) : Json(nullptr);
  j["verdict"] = std::string(to_string(c.verdict));
  return j;
}

inline Json to_json(const SelectionResult &s) {
  Json j;
  j["safe"] = s.safe;
  j["evaluations"] = s.evaluations;
  j["chosen_rank"] = s.chosen_rank;
  j["pool_size"] = s.pool_size;
  j["colliding"] = s.colliding;
  Json c = Json::array();
  for (const auto &r : s.ranked) c.push_back(to_json(r));
  j["candidates"] = std::move(c);
  return j;
}

inline Json to_json(const StepResult &s, bool with_timing = true) {
  Json j;
  j["status"] = std::string(to_string(s.status));
  j["segment"] = s.segment ? to_json(*s.segment) : Json(nullptr);
  j["post_max_winding"] = number(s.post_max_winding);
  j["collision_free"] = s.collision_free;
  j["rounds"] = s.rounds;
  j["sigma_extra"] = s.sigma_extra;
  j["time_s"] = with_timing ? number(s.time_s) : Json(nullptr);
  j["selection"] = s.selection ? to_json(*s.selection) : Json(nullptr);
  return j;
}

inline Json to_json(const MissionReport &r, bool with_timing = true) {
  Json j;
  j["planner"] = r.planner;
  j["n_waypoints"] = r.n_waypoints;
  j["reached"] = r.reached;
  j["collision_free"] = r.collision_free;
  j["tangle_free"] = r.tangle_free;
  j["length"] = r.length;
  j["topo_energy"] = r.topo_energy;
  j["smoothness"] = r.smoothness;
  j["final_max_winding"] = number(r.final_max_winding);
  j["time_s"] = with_timing ? number(r.time_s) : Json(nullptr);
  j["global"] = to_json(std::span<const Point2>(r.global));
  Json steps = Json::array();
  for (const auto &s : r.steps) steps.push_back(to_json(s, with_timing));
  j["steps"] = std::move(steps);
  return j;
}

inline Json to_json(const MeanStd &m) { return {{"mean", number(m.mean)}, {"std", number(m.std)}}; }

inline Json to_json(const Metrics &m, bool with_timing = true) {
  const MeanStd none;
  return {{"trials", m.trials},
          {"collision_free_reach", m.collision_free_reach},
          {"tangle_free_rate", m.tangle_free_rate},
          {"tangle_free_unconditional", m.tangle_free_unconditional},
          {"planning_time", to_json(with_timing ? m.planning_time : none)},
          {"path_length", to_json(m.path_length)},
          {"topo_energy", to_json(m.topo_energy)},
          {"smoothness", to_json(m.smoothness)}};
}

/// Summary report of a benchmark run; mission details are omitted. Timing
/// fields are null unless `with_timing` is set.
inline Json to_json(const BenchmarkResult &b, const SuiteConfig &suite, bool with_timing = true) {
  Json j;
  j["suite"] = to_json(suite);
  Json metrics = Json::array();
  for (const auto &[name, m] : b.metrics) {
    Json e{{"planner", name}};
    e.update(to_json(m, with_timing));
    metrics.push_back(std::move(e));
  }
  j["metrics"] = std::move(metrics);
  Json trials = Json::array();
  for (const auto &rec : b.records) {
    const MissionReport &r = rec.report;
    int unsafe = 0;
    for (const auto &s : r.steps) unsafe += s.status == StepStatus::fallback_unsafe;
    trials.push_back({{"planner", rec.planner},
                      {"trial", rec.trial},
                      {"seed", rec.seed},
                      {"reached", r.reached},
                      {"tangle_free", r.tangle_free},
                      {"steps", r.steps.size()},
                      {"unsafe_steps", unsafe},
                      {"final_max_winding", number(r.final_max_winding)},
                      {"time_s", with_timing ? number(r.time_s) : Json(nullptr)}});
  }
  j["trials"] = std::move(trials);
  return j;
}

} // namespace tmpd::io
