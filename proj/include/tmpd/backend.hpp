#pragma once

// Topological back-end: homotopy dedup, heuristic ranking, lazy curve
// shortening and the entanglement veto.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "tmpd/errors.hpp"
#include "tmpd/frontend.hpp"
#include "tmpd/geometry2d.hpp"
#include "tmpd/history.hpp"
#include "tmpd/topology.hpp"

namespace tmpd {

struct BackendConfig {
  double w_th = 0.95;
  double lambda = 0.5;  // weight on segment length
  double alpha = 1.0;   // barrier gain
  double robot_radius = 0.05;
  TautOptions taut{};

  void validate() const {
    if (!(w_th > 0.0 && w_th <= 1.0)) throw InvalidArgument("W_th must lie in (0, 1]");
    if (lambda < 0.0 || alpha < 0.0) throw InvalidArgument("back-end weights must be non-negative");
    if (!(robot_radius >= 0.0)) throw InvalidArgument("robot_radius must be non-negative");
  }
};

struct Representative {
  std::size_t pool_index = 0;
  Trajectory trajectory;
  HomotopySignature signature;
  /// Number of collision-free pool members sharing the signature.
  std::size_t class_size = 0;
};

/// One representative per homotopy class among the collision-free candidates,
/// ordered by first appearance in the pool. The shortest member represents
/// its class (earlier index on ties).
inline std::vector<Representative> dedup_by_homotopy(const CandidatePool &pool, const Environment &env,
                                                     double robot_radius) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (trajectory_collision_free(env, pool.trajectories[i], robot_radius)) free.push_back(i);
  if (free.empty()) throw EmptyPool("no collision-free candidate in the pool");

  const Trajectory &ref = pool.trajectories[free.front()];
  std::vector<Representative> reps;
  std::map<HomotopySignature, std::size_t> slot;
  for (std::size_t i : free) {
    const Trajectory &tau = pool.trajectories[i];
    if (!(tau.front() == ref.front()) || !(tau.back() == ref.back()))
      throw EndpointMismatch("pool candidates do not share endpoints");
    HomotopySignature sig = homotopy_signature(tau, ref, env);
    auto it = slot.find(sig);
    if (it == slot.end()) {
      slot.emplace(sig, reps.size());
      reps.push_back({i, tau, std::move(sig), 1});
      continue;
    }
    Representative &rep = reps[it->second];
    ++rep.class_size;
    if (tau.length() < rep.trajectory.length()) {
      rep.pool_index = i;
      rep.trajectory = tau;
    }
  }
  return reps;
}

/// J_total = J_topo(history + tau) + lambda * |tau|, with the global winding
/// taken from the history cache plus the candidate's own winding.
inline double heuristic_cost(const Trajectory &tau, const TetherHistory &history, const Environment &env,
                             double lambda, double alpha) {
  if (!(tau.front() == history.tip())) throw EndpointMismatch("candidate does not continue the history tip");
  const WindingVector w = history.windings() + winding_vector(tau, env);
  return topological_energy(w, alpha) + lambda * tau.length();
}

enum class Verdict { unevaluated, accepted, vetoed };

inline std::string_view to_string(Verdict v) {
  switch (v) {
  case Verdict::unevaluated: return "unevaluated";
  case Verdict::accepted: return "accepted";
  case Verdict::vetoed: return "vetoed";
  }
  return "unknown";
}

struct RankedCandidate {
  std::size_t pool_index = 0;
  Trajectory trajectory;
  HomotopySignature signature;
  std::size_t class_size = 0;
  double length = 0.0;
  double topo_energy = 0.0;
  double total_cost = 0.0;
  /// max |W| of the raw global concatenation.
  double raw_max_winding = 0.0;
  std::optional<Trajectory> taut;
  std::optional<double> taut_max_winding;
  Verdict verdict = Verdict::unevaluated;
};

struct SelectionResult {
  Trajectory chosen;
  /// Position of the chosen entry in `ranked`.
  std::size_t chosen_rank = 0;
  bool safe = false;
  int evaluations = 0;
  std::size_t pool_size = 0;
  std::size_t colliding = 0;
  /// Representatives in ranking order.
  std::vector<RankedCandidate> ranked;

  const RankedCandidate &chosen_entry() const { return ranked[chosen_rank]; }
};

namespace detail {

inline std::vector<RankedCandidate> rank_representatives(std::vector<Representative> reps,
                                                         const TetherHistory &history, const Environment &env,
                                                         const BackendConfig &cfg) {
  std::vector<RankedCandidate> ranked;
  ranked.reserve(reps.size());
  for (auto &rep : reps) {
    RankedCandidate rc;
    rc.pool_index = rep.pool_index;
    rc.signature = std::move(rep.signature);
    rc.class_size = rep.class_size;
    rc.length = rep.trajectory.length();
    const WindingVector w = history.windings() + winding_vector(rep.trajectory, env);
    rc.topo_energy = topological_energy(w, cfg.alpha);
    rc.total_cost = heuristic_cost(rep.trajectory, history, env, cfg.lambda, cfg.alpha);
    rc.raw_max_winding = w.max_abs();
    rc.trajectory = std::move(rep.trajectory);
    ranked.push_back(std::move(rc));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedCandidate &a, const RankedCandidate &b) {
    if (a.total_cost != b.total_cost) return a.total_cost < b.total_cost;
    return a.pool_index < b.pool_index;
  });
  return ranked;
}

inline void evaluate_taut(RankedCandidate &rc, const TetherHistory &history, const Environment &env,
                          const BackendConfig &cfg) {
  Trajectory taut = taut_configuration(history.global(rc.trajectory), env, cfg.robot_radius, cfg.taut);
  rc.taut_max_winding = max_abs_winding(taut, env);
  rc.taut = std::move(taut);
  rc.verdict = *rc.taut_max_winding < cfg.w_th ? Verdict::accepted : Verdict::vetoed;
}

} // namespace detail

/// Lazy selection: walk the representatives in ascending J_total, shorten
/// history + candidate and accept the first whose taut global path keeps
/// every |W| below W_th. Without a safe candidate the rank-1 entry is
/// returned with safe = false.
inline SelectionResult select_trajectory(const CandidatePool &pool, const TetherHistory &history,
                                         const Environment &env, const BackendConfig &cfg) {
  cfg.validate();
  if (pool.empty()) throw EmptyPool("candidate pool is empty");
  std::vector<Representative> reps = dedup_by_homotopy(pool, env, cfg.robot_radius);
  std::size_t members = 0;
  for (const auto &r : reps) members += r.class_size;

  SelectionResult out;
  out.pool_size = pool.size();
  out.colliding = pool.size() - members;
  out.ranked = detail::rank_representatives(std::move(reps), history, env, cfg);
  for (std::size_t k = 0; k < out.ranked.size(); ++k) {
    detail::evaluate_taut(out.ranked[k], history, env, cfg);
    ++out.evaluations;
    if (out.ranked[k].verdict == Verdict::accepted) {
      out.chosen_rank = k;
      out.safe = true;
      out.chosen = out.ranked[k].trajectory;
      return out;
    }
  }
  out.chosen_rank = 0;
  out.safe = false;
  out.chosen = out.ranked.front().trajectory;
  return out;
}

} // namespace tmpd
