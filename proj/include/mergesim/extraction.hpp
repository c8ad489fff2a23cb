#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mergesim/decision.hpp"
#include "mergesim/scene.hpp"
#include "mergesim/trajectory_log.hpp"

namespace mergesim {

/// Role states of one event frame.
struct EventFrame {
  std::int64_t frame = 0;
  double time_s = 0.0;
  RoleStates roles;
};

/// A labeled negotiation window around one lag vehicle.
struct MergeEvent {
  std::string id;
  std::string site = "sim";
  Action label = Action::KeepStraight;
  double duration_s = 0.0;
  std::vector<EventFrame> frames;

  /// Index of the first frame in which Lag0 is no longer in the cruising lane,
  /// or frames.size() if it never leaves. Decisions are scored before it.
  std::size_t decision_point() const noexcept {
    for (std::size_t i = 0; i < frames.size(); ++i)
      if (frames[i].roles.lag0.lane != kCruisingLane) return i;
    return frames.size();
  }
};

struct ExtractionOptions {
  double interaction_radius_m = kInteractionRadius;
  double min_duration_s = 5.0;
  int max_dropout_frames = 2;        // bridged gaps in proximity / Lag1 presence
  double lane_change_persist_s = 1.0;
  std::string site = "sim";
};

namespace extraction_detail {

struct Track {
  ActorId id;
  // Position in the frame list -> state.
  std::map<std::size_t, ActorState> states;
};

// Sampling interval of the log (smallest positive time step between frames).
inline double frame_interval(const std::vector<Frame>& frames) {
  double dt = 0.0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const double d = frames[i].time_s - frames[i - 1].time_s;
    if (d > 0.0 && (dt == 0.0 || d < dt)) dt = d;
  }
  return dt > 0.0 ? dt : 0.1;
}

// Inclusive [first, last] runs of true positions where false gaps of at most
// `bridge` positions between trues are filled.
inline std::vector<std::pair<std::size_t, std::size_t>> bridged_runs(const std::vector<bool>& flag,
                                                                     int bridge) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::optional<std::size_t> start, last_true;
  for (std::size_t i = 0; i < flag.size(); ++i) {
    if (!flag[i]) continue;
    if (start && i - *last_true - 1 <= static_cast<std::size_t>(bridge)) {
      last_true = i;
      continue;
    }
    if (start) runs.emplace_back(*start, *last_true);
    start = last_true = i;
  }
  if (start) runs.emplace_back(*start, *last_true);
  return runs;
}

inline bool near_merging_actor(const std::vector<ActorState>& scene, const ActorState& ego,
                               double radius) {
  for (const ActorState& a : scene)
    if (a.id != ego.id && a.lane == kRampLane && std::abs(a.s - ego.s) <= radius) return true;
  return false;
}

// A passing-lane follower counts as Lag1 within the interaction radius.
inline bool has_lag1(const std::vector<ActorState>& scene, const ActorState& ego, double radius) {
  for (const ActorState& a : scene)
    if (a.id != ego.id && a.lane == kPassingLane && a.s <= ego.s && ego.s - a.s <= radius) return true;
  return false;
}

inline RoleStates roles_at(const std::vector<ActorState>& scene, const LaneTopology& topo,
                           const ActorState& ego) {
  return resolve_roles(scene, find_roles(scene, topo, ego));
}

}  // namespace extraction_detail

/// Finds qualifying Lag0 negotiation windows:
///  - the actor never occupies the on-ramp anywhere in the log;
///  - it is in the cruising lane within the interaction radius of an on-ramp
///    actor (either side) over a contiguous window; a transition into the
///    passing lane ends the window and is included as its last frame;
///  - if a passing-lane follower (Lag1) within the radius appears during the
///    window, only the longest stretch in which it is present counts;
///  - the counted window must last longer than min_duration_s.
/// A window is labeled ChangeLanes when it ends in a passing-lane transition
/// that persists for lane_change_persist_s. Events are ordered by start frame
/// then actor id.
inline std::vector<MergeEvent> extract_lag0_events(const std::vector<Frame>& frames,
                                                   const LaneTopology& topo,
                                                   const ExtractionOptions& opt = {}) {
  using namespace extraction_detail;
  const double dt = frame_interval(frames);
  std::vector<std::vector<ActorState>> scenes;
  scenes.reserve(frames.size());
  for (const Frame& f : frames) scenes.push_back(f.states());

  std::map<ActorId, Track> tracks;
  std::set<ActorId> ramp_visitors;
  for (std::size_t fi = 0; fi < scenes.size(); ++fi) {
    for (const ActorState& a : scenes[fi]) {
      Track& t = tracks[a.id];
      t.id = a.id;
      t.states[fi] = a;
      if (a.lane == kRampLane) ramp_visitors.insert(a.id);
    }
  }

  auto lane_at = [&](const Track& t, std::size_t fi) -> std::optional<int> {
    auto it = t.states.find(fi);
    if (it == t.states.end()) return std::nullopt;
    return it->second.lane;
  };

  // A passing-lane stint starting at `fi` that lasts at least the persistence time.
  auto persists_in_passing_lane = [&](const Track& t, std::size_t fi) {
    const double t0 = frames[fi].time_s;
    for (std::size_t k = fi; k < frames.size(); ++k) {
      if (lane_at(t, k) != kPassingLane) return false;
      if (frames[k].time_s - t0 >= opt.lane_change_persist_s - 1e-9) return true;
    }
    return false;
  };

  std::vector<MergeEvent> events;
  for (const auto& [id, track] : tracks) {
    if (ramp_visitors.count(id)) continue;

    std::vector<bool> near(frames.size(), false);
    for (const auto& [fi, st] : track.states) {
      if (st.lane == kCruisingLane)
        near[fi] = near_merging_actor(scenes[fi], st, opt.interaction_radius_m);
    }

    // Bridging never crosses a frame in which the actor is out of the cruising lane.
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    for (auto [first, last] : bridged_runs(near, opt.max_dropout_frames)) {
      std::size_t start = first;
      for (std::size_t k = first; k <= last; ++k) {
        auto lane = lane_at(track, k);
        if (lane && *lane != kCruisingLane) {
          if (k > start) windows.emplace_back(start, k - 1);
          start = k + 1;
        }
      }
      if (start <= last) windows.emplace_back(start, last);
    }

    for (auto [first, last] : windows) {
      Action label = Action::KeepStraight;
      std::size_t end = last;
      const std::size_t next = last + 1;
      if (next < frames.size() && lane_at(track, next) == kPassingLane &&
          persists_in_passing_lane(track, next)) {
        label = Action::ChangeLanes;
        end = next;
      } else {
        while (end > first && !near[end]) --end;
      }
      while (first < end && !near[first]) ++first;
      if (!near[first]) continue;

      // Restrict to Lag1 presence when Lag1 shows up at all.
      std::size_t lo = first, hi = end;
      std::vector<bool> lag1(end - first + 1, false);
      bool any_lag1 = false;
      for (std::size_t k = first; k <= end; ++k) {
        auto it = track.states.find(k);
        if (it != track.states.end() && has_lag1(scenes[k], it->second, opt.interaction_radius_m)) {
          lag1[k - first] = true;
          any_lag1 = true;
        }
      }
      if (any_lag1) {
        std::pair<std::size_t, std::size_t> best{0, 0};
        bool have = false;
        for (auto run : bridged_runs(lag1, opt.max_dropout_frames)) {
          if (!have || run.second - run.first > best.second - best.first) {
            best = run;
            have = true;
          }
        }
        lo = first + best.first;
        hi = first + best.second;
      }

      const double duration = frames[hi].time_s - frames[lo].time_s + dt;
      if (!(duration > opt.min_duration_s + 1e-9)) continue;

      MergeEvent ev;
      ev.id = "evt-" + id + "-" + std::to_string(frames[lo].index);
      ev.site = opt.site;
      ev.label = label;
      ev.duration_s = duration;
      for (std::size_t k = lo; k <= hi; ++k) {
        auto it = track.states.find(k);
        if (it == track.states.end()) continue;  // dropout frame
        ev.frames.push_back(EventFrame{frames[k].index, frames[k].time_s,
                                       roles_at(scenes[k], topo, it->second)});
      }
      events.push_back(std::move(ev));
    }
  }
  std::sort(events.begin(), events.end(), [](const MergeEvent& a, const MergeEvent& b) {
    if (a.frames.front().frame != b.frames.front().frame)
      return a.frames.front().frame < b.frames.front().frame;
    return a.frames.front().roles.lag0.id < b.frames.front().roles.lag0.id;
  });
  return events;
}

// ---------------------------------------------------------------------------
// Event files: one trajectory CSV per event (rows for each role actor, role
// column set) plus manifest.csv.

inline constexpr std::string_view kManifestHeader = "event_id,label,duration_s,site,file";

inline std::vector<Frame> event_to_frames(const MergeEvent& ev) {
  std::vector<Frame> out;
  out.reserve(ev.frames.size());
  for (const EventFrame& ef : ev.frames) {
    Frame f{ef.frame, ef.time_s, {}};
    const RoleStates& r = ef.roles;
    f.actors.push_back({r.lag0, "Lag0", "-"});
    auto add = [&](const std::optional<ActorState>& a, const char* role) {
      if (a) f.actors.push_back({*a, role, "-"});
    };
    add(r.ma, "MA");
    add(r.lead0, "Lead0");
    add(r.lag1, "Lag1");
    add(r.lead1, "Lead1");
    add(r.follow0, "Fol0");
    out.push_back(std::move(f));
  }
  return out;
}

inline MergeEvent frames_to_event(const std::vector<Frame>& frames, std::string id, Action label,
                                  double duration, std::string site) {
  MergeEvent ev;
  ev.id = std::move(id);
  ev.label = label;
  ev.duration_s = duration;
  ev.site = std::move(site);
  for (const Frame& f : frames) {
    EventFrame ef;
    ef.frame = f.index;
    ef.time_s = f.time_s;
    bool have_lag0 = false;
    for (const LoggedActor& a : f.actors) {
      if (a.role == "Lag0") {
        ef.roles.lag0 = a.state;
        have_lag0 = true;
      } else if (a.role == "MA") ef.roles.ma = a.state;
      else if (a.role == "Lead0") ef.roles.lead0 = a.state;
      else if (a.role == "Lag1") ef.roles.lag1 = a.state;
      else if (a.role == "Lead1") ef.roles.lead1 = a.state;
      else if (a.role == "Fol0") ef.roles.follow0 = a.state;
    }
    if (!have_lag0)
      throw LogFormatError(0, "event " + ev.id + ": frame " + std::to_string(f.index) + " has no Lag0");
    ev.frames.push_back(std::move(ef));
  }
  if (ev.frames.empty()) throw LogFormatError(0, "event " + ev.id + ": no frames");
  return ev;
}

inline void write_events(const std::filesystem::path& dir, const std::vector<MergeEvent>& events) {
  std::filesystem::create_directories(dir);
  std::string manifest(kManifestHeader);
  manifest += '\n';
  for (const MergeEvent& ev : events) {
    const std::string file = ev.id + ".csv";
    write_trajectory_log((dir / file).string(), event_to_frames(ev));
    char dur[32];
    std::snprintf(dur, sizeof dur, "%.3f", ev.duration_s);
    manifest += ev.id + "," + std::string(to_string(ev.label)) + "," + dur + "," + ev.site + "," +
                file + "\n";
  }
  std::ofstream os(dir / "manifest.csv", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write manifest in " + dir.string());
  os << manifest;
}

inline std::vector<MergeEvent> load_events(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.csv", std::ios::binary);
  if (!is) throw LogFormatError(0, "missing manifest.csv in " + dir.string());
  std::string line;
  std::getline(is, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) throw LogFormatError(1, "manifest.csv: unexpected header");
  std::vector<MergeEvent> events;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = csv_detail::split(line);
    if (f.size() != 5) throw LogFormatError(lineno, "manifest.csv: expected 5 fields");
    const auto label = parse_action(f[1]);
    if (!label) throw LogFormatError(lineno, "manifest.csv: bad label");
    double duration = 0.0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), duration);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size())
      throw LogFormatError(lineno, "manifest.csv: bad duration");
    events.push_back(frames_to_event(load_trajectory_log((dir / std::string(f[4])).string()),
                                     std::string(f[0]), *label, duration, std::string(f[3])));
  }
  return events;
}

}  // namespace mergesim
