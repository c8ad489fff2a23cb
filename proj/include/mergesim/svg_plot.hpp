#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "mergesim/calibration.hpp"
#include "mergesim/extraction.hpp"
#include "mergesim/trajectory_log.hpp"

namespace mergesim {

namespace svg_detail {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline const char* lane_color(int lane) {
  switch (lane) {
    case kRampLane: return "#d95f02";
    case kCruisingLane: return "#1b9e77";
    case kPassingLane: return "#7570b3";
    default: return "#666666";
  }
}

inline void save(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << body;
}

struct Canvas {
  double w = 800, h = 400, margin = 40;
  double x0, x1, y0, y1;
  double px(double x) const { return margin + (x - x0) / (x1 - x0 > 0 ? x1 - x0 : 1) * (w - 2 * margin); }
  double py(double y) const { return h - margin - (y - y0) / (y1 - y0 > 0 ? y1 - y0 : 1) * (h - 2 * margin); }
  std::string open(const std::string& title, const std::string& xlabel, const std::string& ylabel) const {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
    s += "<text x=\"" + fmt(w / 2) + "\" y=\"" + fmt(h - 8) + "\" text-anchor=\"middle\" font-size=\"12\">" + xlabel +
         "</text>\n";
    s += "<text x=\"12\" y=\"" + fmt(h / 2) + "\" font-size=\"12\" transform=\"rotate(-90 12 " + fmt(h / 2) +
         ")\" text-anchor=\"middle\">" + ylabel + "</text>\n";
    s += "<rect x=\"" + fmt(margin) + "\" y=\"" + fmt(margin) + "\" width=\"" + fmt(w - 2 * margin) + "\" height=\"" +
         fmt(h - 2 * margin) + "\" fill=\"none\" stroke=\"black\"/>\n";
    return s;
  }
};

}  // namespace svg_detail

/// Time-position chart of every actor, each segment colored by lane.
inline std::string lane_occupancy_svg(const std::vector<Frame>& frames) {
  using namespace svg_detail;
  Canvas c;
  c.x0 = frames.empty() ? 0 : frames.front().time_s;
  c.x1 = frames.empty() ? 1 : frames.back().time_s;
  c.y0 = 1e300;
  c.y1 = -1e300;
  std::map<ActorId, std::vector<std::pair<double, ActorState>>> tracks;
  for (const Frame& f : frames)
    for (const LoggedActor& a : f.actors) {
      tracks[a.state.id].emplace_back(f.time_s, a.state);
      c.y0 = std::min(c.y0, a.state.s);
      c.y1 = std::max(c.y1, a.state.s);
    }
  if (c.y0 > c.y1) c.y0 = 0, c.y1 = 1;
  std::string s = c.open("Lane occupancy", "time [s]", "s [m]");
  for (const auto& [id, pts] : tracks) {
    for (std::size_t i = 1; i < pts.size(); ++i) {
      s += "<line x1=\"" + fmt(c.px(pts[i - 1].first)) + "\" y1=\"" + fmt(c.py(pts[i - 1].second.s)) + "\" x2=\"" +
           fmt(c.px(pts[i].first)) + "\" y2=\"" + fmt(c.py(pts[i].second.s)) + "\" stroke=\"" +
           lane_color(pts[i - 1].second.lane) + "\" stroke-width=\"1.2\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

/// Per-frame decisions of a model on one event: a bar per frame, colored by
/// the chosen action, with the observed decision point marked.
inline std::string decision_timeline_svg(const MergeEvent& ev, ModelKind model, std::span<const double> params,
                                         const ScoringContext& ctx = {}) {
  using namespace svg_detail;
  const CachedEvent cached = cache_event(ev, ctx);
  Canvas c;
  c.h = 160;
  c.x0 = 0;
  c.x1 = static_cast<double>(std::max<std::size_t>(ev.frames.size(), 1));
  c.y0 = 0;
  c.y1 = 1;
  std::string s = c.open("Event " + ev.id + " (label " + std::string(to_string(ev.label)) + ")", "frame", "decision");
  const double bw = c.px(1) - c.px(0);
  for (std::size_t k = 0; k < cached.frames.size(); ++k) {
    CachedEvent one{Action::KeepStraight, {cached.frames[k]}};
    const bool lc = predict_cached(model, params, one, ctx.settings) == Action::ChangeLanes;
    s += "<rect x=\"" + fmt(c.px(static_cast<double>(k))) + "\" y=\"" + fmt(c.py(lc ? 1.0 : 0.5)) + "\" width=\"" +
         fmt(bw) + "\" height=\"" + fmt(c.py(0) - c.py(lc ? 1.0 : 0.5)) + "\" fill=\"" +
         (lc ? "#7570b3" : "#1b9e77") + "\"/>\n";
  }
  const double xd = c.px(static_cast<double>(ev.decision_point()));
  s += "<line x1=\"" + fmt(xd) + "\" y1=\"" + fmt(c.margin) + "\" x2=\"" + fmt(xd) + "\" y2=\"" +
       fmt(c.h - c.margin) + "\" stroke=\"red\" stroke-dasharray=\"4 2\"/>\n";
  s += "</svg>\n";
  return s;
}

inline void write_svg(const std::string& path, const std::string& svg) { svg_detail::save(path, svg); }

}  // namespace mergesim
