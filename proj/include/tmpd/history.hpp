#pragma once

// Executed-path history from the anchor, used as the tether proxy.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "tmpd/errors.hpp"
#include "tmpd/geometry2d.hpp"
#include "tmpd/topology.hpp"

namespace tmpd {

class TetherHistory {
public:
  TetherHistory(Point2 anchor, const Environment &env) : points_{anchor} {
    if (!is_finite(anchor)) throw InvalidArgument("anchor must be finite");
    windings_.values.assign(env.size(), 0.0);
  }

  Point2 anchor() const { return points_.front(); }
  Point2 tip() const { return points_.back(); }
  /// True before the first commit (the history is just the anchor).
  bool empty() const { return points_.size() == 1; }
  std::span<const Point2> points() const { return points_; }
  const WindingVector &windings() const { return windings_; }
  std::size_t segments() const { return segments_; }

  Trajectory executed() const {
    if (empty()) throw InvalidArgument("history has no executed segment yet");
    return Trajectory(points_);
  }

  /// Points of history followed by `tau` (junction shared once).
  std::vector<Point2> global_points(const Trajectory &tau) const {
    if (!(tau.front() == tip())) throw EndpointMismatch("segment does not start at the history tip");
    std::vector<Point2> out(points_);
    out.insert(out.end(), tau.waypoints().begin() + 1, tau.waypoints().end());
    return out;
  }

  Trajectory global(const Trajectory &tau) const { return Trajectory(global_points(tau)); }

  /// Appends `tau`; the cache is updated by additivity of the winding integral.
  TetherHistory committed(const Trajectory &tau, const Environment &env) const {
    if (!(tau.front() == tip())) throw EndpointMismatch("segment does not start at the history tip");
    if (env.size() != windings_.size()) throw InvalidArgument("environment does not match history");
    TetherHistory next(*this);
    next.points_.insert(next.points_.end(), tau.waypoints().begin() + 1, tau.waypoints().end());
    next.windings_ += winding_vector(tau, env);
    ++next.segments_;
#ifndef NDEBUG
    const WindingVector full = winding_vector(next.points_, env);
    for (std::size_t i = 0; i < full.size(); ++i)
      if (std::abs(full[i] - next.windings_[i]) > 1e-9) throw std::logic_error("winding cache drifted from recomputation");
#endif
    return next;
  }

private:
  std::vector<Point2> points_;
  WindingVector windings_;
  std::size_t segments_ = 0;
};

} // namespace tmpd
