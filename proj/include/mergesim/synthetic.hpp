#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mergesim/calibration.hpp"
#include "mergesim/extraction.hpp"

namespace mergesim {

struct SyntheticOptions {
  std::size_t events = 500;
  std::size_t frames = 30;
  double dt = 0.2;
  std::uint64_t seed = kDefaultSeed;
  std::string site = "synthetic";
};

/// A random negotiation scene around a lag vehicle at s = 100 m.
template <typename Urbg>
RoleStates random_role_scene(Urbg& rng) {
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto actor = [](const char* id, int lane, double s, double v) {
    ActorState a;
    a.id = id;
    a.lane = lane;
    a.s = s;
    a.v = std::max(0.0, v);
    return a;
  };
  RoleStates r;
  r.lag0 = actor("lag0", kCruisingLane, 100.0, uni(12.0, 30.0));
  const double v = r.lag0.v;
  if (coin(0.9)) r.ma = actor("ma", kRampLane, 100.0 + uni(1.0, 45.0), v + uni(-10.0, 3.0));
  if (coin(0.85)) r.lead0 = actor("lead0", kCruisingLane, 100.0 + uni(12.0, 90.0), v + uni(-8.0, 4.0));
  if (coin(0.8)) r.lag1 = actor("lag1", kPassingLane, 100.0 - uni(0.0, 60.0), v + uni(-4.0, 8.0));
  if (coin(0.8)) r.lead1 = actor("lead1", kPassingLane, 100.0 + uni(8.0, 100.0), v + uni(-4.0, 8.0));
  if (coin(0.7)) r.follow0 = actor("fol0", kCruisingLane, 100.0 - uni(10.0, 60.0), v + uni(-3.0, 3.0));
  return r;
}

namespace synthetic_detail {

// Constant-speed roll-out with per-actor speed jitter so gaps evolve.
template <typename Urbg>
std::vector<EventFrame> roll_out(const RoleStates& start, const SyntheticOptions& opt, Urbg& rng) {
  std::normal_distribution<double> jitter(0.0, 0.15);
  std::vector<EventFrame> frames;
  RoleStates r = start;
  for (std::size_t k = 0; k < opt.frames; ++k) {
    frames.push_back(EventFrame{static_cast<std::int64_t>(k), static_cast<double>(k) * opt.dt, r});
    auto move = [&](ActorState& a) {
      a.v = std::max(0.0, a.v + jitter(rng));
      a.s += a.v * opt.dt;
    };
    move(r.lag0);
    for (auto* o : {&r.ma, &r.lead0, &r.lag1, &r.lead1, &r.follow0})
      if (*o) move(**o);
  }
  return frames;
}

}  // namespace synthetic_detail

/// Labels `frames` with a hidden model: the event is a lane change if the
/// model decides to change at any frame, in which case Lag0 is in the passing
/// lane from the next frame on.
inline MergeEvent label_event(std::vector<EventFrame> frames, std::string id, ModelKind model,
                              std::span<const double> params, const ScoringContext& ctx, const std::string& site) {
  MergeEvent ev;
  ev.id = std::move(id);
  ev.site = site;
  ev.frames = std::move(frames);
  const CachedEvent cached = cache_event(ev, ctx);
  for (std::size_t k = 0; k < cached.frames.size(); ++k) {
    CachedEvent one{Action::KeepStraight, {cached.frames[k]}};
    if (predict_cached(model, params, one, ctx.settings) == Action::ChangeLanes) {
      ev.label = Action::ChangeLanes;
      // Keep one frame after the decision so the decision point is visible.
      if (k + 2 < ev.frames.size()) ev.frames.resize(k + 2);
      if (k + 1 < ev.frames.size()) {
        ev.frames[k + 1].roles.lag0.lane = kPassingLane;
      } else {
        EventFrame next = ev.frames.back();
        next.frame += 1;
        next.time_s += ev.frames.size() > 1 ? ev.frames[1].time_s - ev.frames[0].time_s : 0.2;
        next.roles.lag0.lane = kPassingLane;
        ev.frames.push_back(next);
      }
      break;
    }
  }
  ev.duration_s = ev.frames.back().time_s - ev.frames.front().time_s +
                  (ev.frames.size() > 1 ? ev.frames[1].time_s - ev.frames[0].time_s : 0.0);
  return ev;
}

/// Events labeled by one hidden parameter set.
inline std::vector<MergeEvent> generate_events(ModelKind model, std::span<const double> hidden,
                                               const SyntheticOptions& opt = {}, const ScoringContext& ctx = {}) {
  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32), 0x5e1u};
  std::mt19937_64 rng(seq);
  std::vector<MergeEvent> out;
  out.reserve(opt.events);
  for (std::size_t i = 0; i < opt.events; ++i) {
    const RoleStates start = random_role_scene(rng);
    out.push_back(label_event(synthetic_detail::roll_out(start, opt, rng), "syn-" + std::to_string(i), model,
                              hidden, ctx, opt.site));
  }
  return out;
}

/// Events labeled by two hidden parameter sets, each event drawing its
/// labeler with probability `share_b` for set b. Labels of similar scenes
/// then conflict, which no single parameter set can reconcile.
inline std::vector<MergeEvent> generate_mixed_events(ModelKind model, std::span<const double> hidden_a,
                                                     std::span<const double> hidden_b, double share_b,
                                                     const SyntheticOptions& opt = {},
                                                     const ScoringContext& ctx = {}) {
  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32), 0x3a1u};
  std::mt19937_64 rng(seq);
  std::bernoulli_distribution pick(share_b);
  std::vector<MergeEvent> out;
  out.reserve(opt.events);
  for (std::size_t i = 0; i < opt.events; ++i) {
    const RoleStates start = random_role_scene(rng);
    const auto hidden = pick(rng) ? hidden_b : hidden_a;
    out.push_back(label_event(synthetic_detail::roll_out(start, opt, rng), "mix-" + std::to_string(i), model,
                              hidden, ctx, opt.site));
  }
  return out;
}

}  // namespace mergesim
