#pragma once

// Deterministic SVG overlays of environments and trajectories.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tmpd/errors.hpp"
#include "tmpd/geometry2d.hpp"

namespace tmpd {

struct PathStyle {
  std::string stroke = "#1f77b4";
  double width = 2.0;
  double opacity = 1.0;
};

struct Layer {
  Trajectory trajectory;
  PathStyle style{};
};

enum class MarkerKind { anchor, goal };

struct Marker {
  Point2 at;
  MarkerKind kind = MarkerKind::goal;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

} // namespace detail

/// The workspace maps to a viewBox of `px_per_meter` pixels per meter with y up.
inline std::string svg_string(const Environment &env, const std::vector<Layer> &layers,
                              const std::vector<Marker> &markers = {}, double px_per_meter = 250.0) {
  const Rect &b = env.bounds();
  const double w = (b.max.x - b.min.x) * px_per_meter;
  const double h = (b.max.y - b.min.y) * px_per_meter;
  auto X = [&](double x) { return detail::fmt((x - b.min.x) * px_per_meter); };
  auto Y = [&](double y) { return detail::fmt((b.max.y - y) * px_per_meter); };
  auto L = [&](double d) { return detail::fmt(d * px_per_meter); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << detail::fmt(w) << ' ' << detail::fmt(h)
     << "\" width=\"" << detail::fmt(w) << "\" height=\"" << detail::fmt(h) << "\">\n";
  os << "<rect class=\"workspace\" x=\"0\" y=\"0\" width=\"" << detail::fmt(w) << "\" height=\"" << detail::fmt(h)
     << "\" fill=\"#ffffff\" stroke=\"#000000\"/>\n";
  for (const auto &o : env.obstacles()) {
    if (const auto *c = std::get_if<Circle>(&o.shape)) {
      os << "<circle class=\"obstacle\" cx=\"" << X(c->center.x) << "\" cy=\"" << Y(c->center.y) << "\" r=\""
         << L(c->radius) << "\" fill=\"#808080\"/>\n";
    } else {
      const Box &bx = std::get<Box>(o.shape);
      os << "<rect class=\"obstacle\" x=\"" << X(bx.center.x - bx.half_extents.x) << "\" y=\""
         << Y(bx.center.y + bx.half_extents.y) << "\" width=\"" << L(2.0 * bx.half_extents.x) << "\" height=\""
         << L(2.0 * bx.half_extents.y) << "\" fill=\"#808080\"/>\n";
    }
  }
  for (const auto &layer : layers) {
    os << "<polyline fill=\"none\" stroke=\"" << layer.style.stroke << "\" stroke-width=\"" << detail::fmt(layer.style.width)
       << "\" stroke-opacity=\"" << detail::fmt(layer.style.opacity) << "\" points=\"";
    bool first = true;
    for (Point2 p : layer.trajectory.waypoints()) {
      if (!first) os << ' ';
      first = false;
      os << X(p.x) << ',' << Y(p.y);
    }
    os << "\"/>\n";
  }
  for (const auto &m : markers) {
    const char *fill = m.kind == MarkerKind::anchor ? "#d62728" : "#2ca02c";
    os << "<circle class=\"marker\" cx=\"" << X(m.at.x) << "\" cy=\"" << Y(m.at.y) << "\" r=\"6.000\" fill=\"" << fill
       << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void render_svg(const Environment &env, const std::vector<Layer> &layers, const std::string &out_path,
                       const std::vector<Marker> &markers = {}) {
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + out_path + "' for writing");
  f << svg_string(env, layers, markers);
  if (!f) throw IoError("failed writing '" + out_path + "'");
}

} // namespace tmpd
