#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mergesim/decision.hpp"
#include "mergesim/game.hpp"
#include "mergesim/longitudinal.hpp"
#include "mergesim/mobil.hpp"
#include "mergesim/presets.hpp"
#include "mergesim/scene.hpp"
#include "mergesim/trajectory_log.hpp"

namespace mergesim {

inline constexpr std::uint64_t kDefaultSeed = 42;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class ModelBinding { None, Mobil, Mbrgt };

inline std::string_view to_string(ModelBinding m) noexcept {
  switch (m) {
    case ModelBinding::Mobil: return "mobil";
    case ModelBinding::Mbrgt: return "mbrgt";
    default: return "none";
  }
}

struct ActorSpec {
  ActorState initial;
  ModelBinding model = ModelBinding::None;
  /// Registered preset id, "sample" to draw from the behavior mixture, or
  /// empty when `params` is given.
  std::string preset = "sample";
  std::optional<std::vector<double>> params;
};

/// Scripted behavior of on-ramp actors: they follow MR-IDM towards the ramp
/// end and merge once both cruising-lane gaps are acceptable inside the zone.
struct MergeBehavior {
  double zone_length_m = 250.0;
  double gap_front_m = 6.0;
  double gap_rear_m = 6.0;
  double duration_s = 3.0;
};

struct ScenarioConfig {
  LaneTopology topology;
  IdmParams idm;
  MbrgtParams mbrgt;  // rationality settings shared by all mbrgt actors
  ProjectionOptions projection;
  MergeBehavior merge;
  double dt = 0.02;
  double duration = 60.0;
  std::uint64_t seed = kDefaultSeed;
  double weight_keep_straight = 1.0 - kDefaultLaneChangeShare;
  double weight_lane_change = kDefaultLaneChangeShare;
  double mu_ln = std::log(5.0);
  double sigma_ln = 0.3;
  std::vector<ActorSpec> actors;

  void validate() const {
    try {
      topology.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("topology", e.what());
    }
    try {
      idm.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("idm", e.what());
    }
    try {
      mbrgt.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("mbrgt", e.what());
    }
    if (!(dt > 0.0)) throw ConfigError("scenario.dt", "must be > 0");
    if (!(duration > 0.0)) throw ConfigError("scenario.duration", "must be > 0");
    if (!(weight_keep_straight >= 0.0 && weight_lane_change >= 0.0) ||
        std::abs(weight_keep_straight + weight_lane_change - 1.0) > 1e-9)
      throw ConfigError("mixture", "weights must be non-negative and sum to 1");
    if (!(sigma_ln >= 0.0)) throw ConfigError("lane_change.sigma_ln", "must be >= 0");
    if (!(projection.horizon_s >= 0.0)) throw ConfigError("projection.horizon_s", "must be >= 0");
    if (!(merge.duration_s > 0.0)) throw ConfigError("merge.duration", "must be > 0");
    if (actors.empty()) throw ConfigError("actors", "at least one actor required");
    std::map<ActorId, std::size_t> seen;
    for (std::size_t i = 0; i < actors.size(); ++i) {
      const std::string path = "actors[" + std::to_string(i) + "]";
      const ActorSpec& a = actors[i];
      if (a.initial.id.empty()) throw ConfigError(path + ".id", "must not be empty");
      if (!seen.emplace(a.initial.id, i).second)
        throw ConfigError(path + ".id", "duplicate id '" + a.initial.id + "'");
      try {
        a.initial.validate(topology);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
      }
      if (a.initial.lane == kRampLane && !(a.initial.s < topology.ramp_end_s))
        throw ConfigError(path + ".s", "on-ramp actor must start before ramp_end_s");
      if (a.model == ModelBinding::None) continue;
      const ModelKind kind = a.model == ModelBinding::Mobil ? ModelKind::Mobil : ModelKind::Mbrgt;
      if (a.params) {
        if (a.params->size() != parameter_names(kind).size())
          throw ConfigError(path + ".params", "expected " +
                                                  std::to_string(parameter_names(kind).size()) +
                                                  " values");
        if (kind == ModelKind::Mobil) {
          try {
            mobil_from_vector(*a.params).validate();
          } catch (const std::invalid_argument& e) {
            throw ConfigError(path + ".params", e.what());
          }
        }
      } else if (a.preset != "sample") {
        if (!PresetRegistry::instance().contains(a.preset))
          throw ConfigError(path + ".preset", "unknown preset '" + a.preset + "'");
        if (PresetRegistry::instance().get(a.preset).model != kind)
          throw ConfigError(path + ".preset", "preset '" + a.preset + "' belongs to another model");
      }
    }
  }

  std::int64_t step_count() const noexcept { return std::llround(duration / dt); }
};

/// Lognormal lane-change duration, seconds.
template <typename Urbg>
double sample_lc_duration(Urbg& rng, double mu_ln, double sigma_ln) {
  if (!(sigma_ln >= 0.0)) throw std::invalid_argument("sample_lc_duration: sigma_ln must be >= 0");
  if (sigma_ln == 0.0) return std::exp(mu_ln);
  std::lognormal_distribution<double> dist(mu_ln, sigma_ln);
  return dist(rng);
}

/// Quintic smooth step with zero slope and curvature at both ends.
inline double lateral_profile(double progress) {
  if (!(progress >= 0.0 && progress <= 1.0))
    throw std::invalid_argument("lateral_profile: progress outside [0, 1]");
  const double p = progress;
  return p * p * p * (10.0 + p * (-15.0 + 6.0 * p));
}

struct LaneChangeState {
  double start_time = 0.0;
  double duration = 1.0;
  int source = kCruisingLane;
  int target = kPassingLane;
  double progress = 0.0;
};

struct Agent {
  ActorState state;
  ModelBinding model = ModelBinding::None;
  std::string preset;  // resolved preset id or "custom"
  MobilParams mobil;
  MbrgtParams mbrgt;
  std::optional<LaneChangeState> lane_change;
  std::optional<double> negotiation_start;
  std::mt19937_64 rng;
  std::string role = "-";
  std::string decision = "-";
};

struct RunMetrics {
  std::int64_t steps = 0;
  double simulated_s = 0.0;
  double wall_s = 0.0;
  double model_s = 0.0;
  std::int64_t decisions_keep = 0;
  std::int64_t decisions_change = 0;
  std::int64_t lane_changes_started = 0;
  std::int64_t lane_changes_completed = 0;
  std::int64_t merges_started = 0;
  std::int64_t solver_fallbacks = 0;

  double rtf_overall() const noexcept {
    return wall_s > 0.0 ? simulated_s / wall_s : std::numeric_limits<double>::infinity();
  }
  double rtf_model() const noexcept {
    return model_s > 0.0 ? simulated_s / model_s : std::numeric_limits<double>::infinity();
  }
};

struct World {
  ScenarioConfig config;
  double time = 0.0;
  std::int64_t frame = 0;
  std::vector<Agent> agents;
  RunMetrics metrics;
};

inline World make_world(const ScenarioConfig& cfg) {
  cfg.validate();
  World w;
  w.config = cfg;
  std::seed_seq setup_seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          0x5e7u};
  std::mt19937_64 setup(setup_seq);
  for (std::size_t i = 0; i < cfg.actors.size(); ++i) {
    const ActorSpec& spec = cfg.actors[i];
    Agent a;
    a.state = spec.initial;
    a.model = spec.model;
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(i + 1)};
    a.rng.seed(seq);
    if (spec.model != ModelBinding::None) {
      const ModelKind kind = spec.model == ModelBinding::Mobil ? ModelKind::Mobil : ModelKind::Mbrgt;
      std::vector<double> values;
      if (spec.params) {
        values = *spec.params;
        a.preset = "custom";
      } else {
        a.preset = spec.preset == "sample"
                       ? std::string(sample_behavior(setup, kind, cfg.weight_lane_change))
                       : spec.preset;
        values = load_preset(a.preset);
      }
      if (kind == ModelKind::Mobil) a.mobil = mobil_from_vector(values);
      else a.mbrgt = mbrgt_from_vector(values, cfg.mbrgt);
    }
    w.agents.push_back(std::move(a));
  }
  return w;
}

namespace engine_detail {

inline bool occupies(const Agent& a, int lane) noexcept {
  return a.state.lane == lane || (a.lane_change && a.lane_change->target == lane);
}

// Nearest agent ahead of `ego` occupying `lane`, as an ActorState.
inline std::optional<ActorState> leader_in(const std::vector<Agent>& agents, std::size_t ego, int lane) {
  const ActorState& e = agents[ego].state;
  const Agent* best = nullptr;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i == ego || !occupies(agents[i], lane)) continue;
    const double ds = agents[i].state.s - e.s;
    if (ds <= 0.0) continue;
    if (!best || ds < best->state.s - e.s) best = &agents[i];
  }
  if (!best) return std::nullopt;
  return best->state;
}

// Nearest non-merging-yet on-ramp actor ahead of `ego` within the interaction radius.
inline std::optional<ActorState> merging_actor_ahead(const std::vector<Agent>& agents, std::size_t ego,
                                                     const LaneTopology& topo) {
  const ActorState& e = agents[ego].state;
  const Agent* best = nullptr;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Agent& a = agents[i];
    if (i == ego || a.state.lane != kRampLane || a.state.s > topo.ramp_end_s) continue;
    if (!ma_projects_onto(a.state, e)) continue;
    if (!best || a.state.s < best->state.s) best = &a;
  }
  if (!best) return std::nullopt;
  return best->state;
}

inline double longitudinal_accel(const World& w, std::size_t i) {
  const Agent& ag = w.agents[i];
  const ActorState& ego = ag.state;
  const IdmParams& p = w.config.idm;
  std::vector<int> lanes{ego.lane};
  if (ag.lane_change) lanes.push_back(ag.lane_change->target);
  double a = std::numeric_limits<double>::infinity();
  for (int lane : lanes) {
    auto lead = leader_in(w.agents, i, lane);
    std::optional<ActorState> ma;
    if (lane == kCruisingLane) ma = merging_actor_ahead(w.agents, i, w.config.topology);
    double al = mr_idm_accel(ego, lead, ma, p);
    if (lane == kRampLane && !ag.lane_change) {
      // The ramp end acts as a stationary obstacle.
      ActorState wall;
      wall.id = "#ramp-end";
      wall.s = w.config.topology.ramp_end_s;
      wall.v = 0.0;
      wall.length = 1e-3;
      if (wall.s > ego.s) al = std::min(al, idm_accel(ego.v, stimulus(wall, ego), p));
    }
    a = std::min(a, al);
  }
  return a;
}

inline std::vector<ActorState> snapshot(const std::vector<Agent>& agents) {
  std::vector<ActorState> out;
  out.reserve(agents.size());
  for (const Agent& a : agents) out.push_back(a.state);
  return out;
}

// For every on-ramp actor, the nearest cruising-lane actor at or behind it
// within the interaction radius is its lag vehicle.
inline std::vector<std::size_t> lag_vehicles(const std::vector<Agent>& agents, const LaneTopology& topo) {
  std::vector<std::size_t> out;
  for (const Agent& ma : agents) {
    if (ma.state.lane != kRampLane || ma.state.s > topo.ramp_end_s) continue;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const ActorState& c = agents[i].state;
      if (c.lane != kCruisingLane || c.s > ma.state.s) continue;
      if (ma.state.s - c.s > kInteractionRadius) continue;
      if (!best || c.s > agents[*best].state.s) best = i;
    }
    if (best && std::find(out.begin(), out.end(), *best) == out.end()) out.push_back(*best);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool merge_gap_acceptable(const World& w, std::size_t i) {
  const ActorState& ma = w.agents[i].state;
  const MergeBehavior& mb = w.config.merge;
  for (std::size_t k = 0; k < w.agents.size(); ++k) {
    if (k == i || !occupies(w.agents[k], kCruisingLane)) continue;
    const ActorState& o = w.agents[k].state;
    if (o.s >= ma.s) {
      if (o.s - o.length - ma.s < mb.gap_front_m) return false;
    } else if (ma.s - ma.length - o.s < mb.gap_rear_m) {
      return false;
    }
  }
  return true;
}

}  // namespace engine_detail

/// Per-tick timing split: wall time of the behavior-model code only.
struct StepTiming {
  double model_s = 0.0;
};

/// Advances the world by one tick of length `dt`. Actor rows for the current
/// frame (state before integration, applied acceleration, role, decision) are
/// appended to `log` if given.
inline void step(World& w, double dt, std::vector<Frame>* log = nullptr) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  using clock = std::chrono::steady_clock;
  const ScenarioConfig& cfg = w.config;
  const LaneTopology& topo = cfg.topology;
  const std::size_t n = w.agents.size();
  for (Agent& a : w.agents) {
    a.role = "-";
    a.decision = "-";
  }

  const auto t_model0 = clock::now();
  std::vector<double> accel(n);
  for (std::size_t i = 0; i < n; ++i) accel[i] = engine_detail::longitudinal_accel(w, i);

  const std::vector<ActorState> scene = engine_detail::snapshot(w.agents);
  std::vector<std::pair<std::size_t, Action>> starts;
  for (std::size_t i : engine_detail::lag_vehicles(w.agents, topo)) {
    Agent& ag = w.agents[i];
    const RoleAssignment roles = assign_roles(scene, topo, ag.state.id);
    auto label = [&](const std::optional<ActorId>& id, const char* role) {
      if (!id) return;
      for (Agent& o : w.agents)
        if (o.state.id == *id && o.role == "-") o.role = role;
    };
    ag.role = "Lag0";
    label(roles.ma, "MA");
    label(roles.lead0, "Lead0");
    label(roles.lag1, "Lag1");
    label(roles.lead1, "Lead1");
    if (!ag.negotiation_start) ag.negotiation_start = w.time;
    if (ag.model == ModelBinding::None || ag.lane_change) continue;

    const RoleStates rs = resolve_roles(scene, roles);
    const AccelProjection proj = project_accelerations(rs, cfg.idm, cfg.projection);
    Decision d;
    if (ag.model == ModelBinding::Mobil) {
      d = mobil_decide(proj, follower_accelerations(rs, cfg.idm), ag.mobil);
    } else {
      const double t_neg = 1.0 + (w.time - *ag.negotiation_start);
      d = mbrgt_decide(proj, ag.mbrgt, t_neg, passing_lane_density(scene, ag.state), ag.rng);
      if (d.solver == SolverPath::SupportEnumeration) ++w.metrics.solver_fallbacks;
    }
    ag.decision = std::string(to_string(d.action));
    if (d.action == Action::ChangeLanes) {
      ++w.metrics.decisions_change;
      if (topo.has_lane(kPassingLane)) starts.emplace_back(i, d.action);
    } else {
      ++w.metrics.decisions_keep;
    }
  }
  w.metrics.model_s += std::chrono::duration<double>(clock::now() - t_model0).count();

  for (auto [i, action] : starts) {
    Agent& ag = w.agents[i];
    const double dur = sample_lc_duration(ag.rng, cfg.mu_ln, cfg.sigma_ln);
    ag.lane_change = LaneChangeState{w.time, dur, ag.state.lane, kPassingLane, 0.0};
    ++w.metrics.lane_changes_started;
  }
  for (std::size_t i = 0; i < n; ++i) {
    Agent& ag = w.agents[i];
    if (ag.state.lane != kRampLane || ag.lane_change) continue;
    if (ag.state.s < topo.ramp_end_s - cfg.merge.zone_length_m) continue;
    if (engine_detail::merge_gap_acceptable(w, i)) {
      ag.lane_change = LaneChangeState{w.time, cfg.merge.duration_s, kRampLane, kCruisingLane, 0.0};
      ++w.metrics.merges_started;
    }
  }

  if (log) {
    Frame f{w.frame, w.time, {}};
    f.actors.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      LoggedActor row{w.agents[i].state, w.agents[i].role, w.agents[i].decision};
      row.state.a = std::max(accel[i], -kHardBraking);
      f.actors.push_back(std::move(row));
    }
    log->push_back(std::move(f));
  }

  for (std::size_t i = 0; i < n; ++i) {
    Agent& ag = w.agents[i];
    ActorState& s = ag.state;
    s.a = std::max(accel[i], -kHardBraking);
    s.v = std::max(0.0, s.v + s.a * dt);
    s.s += s.v * dt;
    if (ag.lane_change) {
      LaneChangeState& lc = *ag.lane_change;
      lc.progress = std::min(1.0, (w.time + dt - lc.start_time) / lc.duration);
      if (lc.progress >= 1.0 - 1e-12) {
        s.lane = lc.target;
        s.d = 0.0;
        ag.lane_change.reset();
        if (lc.source != kRampLane) ++w.metrics.lane_changes_completed;
      } else {
        s.d = lateral_profile(lc.progress) * (lc.target - lc.source) * topo.lane_width;
      }
    }
  }
  w.time = static_cast<double>(w.frame + 1) * dt;
  ++w.frame;
  ++w.metrics.steps;
  w.metrics.simulated_s += dt;
}

struct ScenarioResult {
  std::vector<Frame> log;
  RunMetrics metrics;
  std::vector<std::pair<ActorId, std::string>> bindings;  // actor -> preset
};

/// Runs the configured scenario for round(duration / dt) ticks.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, bool keep_log = true) {
  using clock = std::chrono::steady_clock;
  World w = make_world(cfg);
  ScenarioResult out;
  for (const Agent& a : w.agents)
    if (a.model != ModelBinding::None) out.bindings.emplace_back(a.state.id, a.preset);
  const std::int64_t steps = cfg.step_count();
  if (keep_log) out.log.reserve(static_cast<std::size_t>(steps));
  const auto t0 = clock::now();
  for (std::int64_t k = 0; k < steps; ++k) step(w, cfg.dt, keep_log ? &out.log : nullptr);
  w.metrics.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
  out.metrics = w.metrics;
  return out;
}

}  // namespace mergesim
