#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "mergesim/decision.hpp"
#include "mergesim/drac.hpp"
#include "mergesim/scene.hpp"

namespace mergesim {

/// Deceleration returned for a leader at non-positive gap, m/s^2.
inline constexpr double kHardBraking = 9.0;

struct IdmParams {
  double s0 = 2.0;        // jam distance, m
  double T = 1.6;         // time headway, s
  double a_max = 0.73;    // m/s^2
  double b_comf = 1.67;   // m/s^2
  double v0 = 33.33;      // m/s
  double delta = 4.0;
  double zeta = 1.0;      // scaling of the merging-actor interaction term

  void validate() const {
    auto positive = [](double x, const char* name) {
      if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument(std::string("idm.") + name + ": must be > 0");
    };
    positive(s0, "s0");
    positive(T, "T");
    positive(a_max, "a_max");
    positive(b_comf, "b_comf");
    positive(v0, "v0");
    positive(delta, "delta");
    positive(zeta, "zeta");
  }
};

struct LeaderStimulus {
  double v = 0.0;
  double gap = std::numeric_limits<double>::infinity();
};

inline double idm_desired_gap(double v, double v_lead, const IdmParams& p) noexcept {
  const double dyn = v * p.T + v * (v - v_lead) / (2.0 * std::sqrt(p.a_max * p.b_comf));
  return p.s0 + std::max(0.0, dyn);
}

/// Intelligent Driver Model acceleration. `interaction_scale` multiplies the
/// leader interaction term; with no leader only the free-road term remains.
inline double idm_accel(double v, const std::optional<LeaderStimulus>& leader, const IdmParams& p,
                        double interaction_scale = 1.0) noexcept {
  const double free_term = std::pow(v / p.v0, p.delta);
  if (!leader || std::isinf(leader->gap)) return p.a_max * (1.0 - free_term);
  if (leader->gap <= 0.0) return -kHardBraking;
  const double ratio = idm_desired_gap(v, leader->v, p) / leader->gap;
  return p.a_max * (1.0 - free_term - interaction_scale * ratio * ratio);
}

inline std::optional<LeaderStimulus> stimulus(const std::optional<ActorState>& leader,
                                              const ActorState& ego) noexcept {
  if (!leader) return std::nullopt;
  return LeaderStimulus{leader->v, bumper_gap(*leader, ego)};
}

/// True when the merging actor acts as a ghost leader for `ego`.
inline bool ma_projects_onto(const ActorState& ma, const ActorState& ego) noexcept {
  const double ds = ma.s - ego.s;
  return ds > 0.0 && ds <= kInteractionRadius;
}

/// Merge-reactive IDM: the most restrictive response over the lane leader and
/// the merging actor projected onto the ego lane.
inline double mr_idm_accel(const ActorState& ego, const std::optional<ActorState>& lead,
                           const std::optional<ActorState>& ma, const IdmParams& p) noexcept {
  double a = idm_accel(ego.v, stimulus(lead, ego), p);
  if (ma && ma_projects_onto(*ma, ego)) {
    a = std::min(a, idm_accel(ego.v, stimulus(ma, ego), p, p.zeta));
  }
  return a;
}

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Projected accelerations and DRACs for the four (Lag0 action i, Lag1 action j)
/// cells. Cells that involve an absent actor hold 0.
struct AccelProjection {
  Matrix2 lag0_accel{};
  Matrix2 lag1_accel{};
  Matrix2 drac_lag0_lead1{};  // Lag0 following Lead1 (change row only)
  Matrix2 drac_lag1_lag0{};   // Lag1 following Lag0 (change row only)
  Matrix2 drac_lag0_lead0{};  // Lag0 following Lead0 (keep row only)
  Matrix2 drac_lag1_lead1{};  // Lag1 following Lead1
};

struct ProjectionOptions {
  /// Look-ahead over which each case's acceleration is applied before DRACs
  /// are evaluated, seconds. Zero evaluates DRACs on the current states.
  double horizon_s = 1.0;
};

/// Constant-acceleration advance with braking limited to kHardBraking and no
/// reversing.
inline ActorState advance(ActorState x, double accel, double dt) noexcept {
  const double a = std::max(accel, -kHardBraking);
  const double v_end = x.v + a * dt;
  if (v_end >= 0.0) {
    x.s += 0.5 * (x.v + v_end) * dt;
    x.v = v_end;
  } else {
    x.s += 0.5 * x.v * (x.v / -a);
    x.v = 0.0;
  }
  x.a = a;
  return x;
}

/// Accelerations of the followers affected by a Lag0 lane change, before and
/// after the change (0 for absent actors).
struct FollowerAccels {
  double new_before = 0.0;  // Lag1 following Lead1
  double new_after = 0.0;   // Lag1 following Lag0 placed in lane 1
  double old_before = 0.0;  // cruising-lane follower following Lag0
  double old_after = 0.0;   // cruising-lane follower following Lead0
};

namespace detail {

// Projected responses are limited to what a vehicle can actually brake; raw
// IDM values diverge as the gap closes.
inline double achievable(double a) noexcept { return std::max(a, -kHardBraking); }

inline double lag1_not_yield(const RoleStates& r, const IdmParams& p) {
  return achievable(mr_idm_accel(*r.lag1, r.lead1, std::nullopt, p));
}

inline double lag1_yield(const RoleStates& r, const IdmParams& p) {
  // Lag0 keeps its (s, v) when hypothetically placed in lane 1.
  return std::min(lag1_not_yield(r, p),
                  achievable(idm_accel(r.lag1->v, stimulus(r.lag0, *r.lag1), p)));
}

}  // namespace detail

inline FollowerAccels follower_accelerations(const RoleStates& r, const IdmParams& p) {
  FollowerAccels f;
  if (r.lag1) {
    f.new_before = detail::lag1_not_yield(r, p);
    f.new_after = detail::lag1_yield(r, p);
  }
  if (r.follow0) {
    f.old_before = detail::achievable(mr_idm_accel(*r.follow0, r.lag0, r.ma, p));
    f.old_after = detail::achievable(mr_idm_accel(*r.follow0, r.lead0, r.ma, p));
  }
  return f;
}

inline AccelProjection project_accelerations(const RoleStates& r, const IdmParams& p,
                                             const ProjectionOptions& opt = {}) {
  AccelProjection out;
  constexpr int keep = index_of(Action::KeepStraight);
  constexpr int change = index_of(Action::ChangeLanes);

  const double a_keep = detail::achievable(mr_idm_accel(r.lag0, r.lead0, r.ma, p));
  const double a_change = detail::achievable(mr_idm_accel(r.lag0, r.lead1, std::nullopt, p));
  std::array<double, 2> a_lag1{0.0, 0.0};
  if (r.lag1) {
    a_lag1[index_of(FollowerAction::NotYield)] = detail::lag1_not_yield(r, p);
    a_lag1[index_of(FollowerAction::Yield)] = detail::lag1_yield(r, p);
  }
  for (int j = 0; j < 2; ++j) {
    out.lag0_accel[keep][j] = a_keep;
    out.lag0_accel[change][j] = a_change;
    out.lag1_accel[keep][j] = a_lag1[j];
    out.lag1_accel[change][j] = a_lag1[j];
  }

  const double h = opt.horizon_s;
  const ActorState lag0_keep = advance(r.lag0, a_keep, h);
  const ActorState lag0_change = advance(r.lag0, a_change, h);
  std::optional<ActorState> lead0, lead1;
  if (r.lead0) lead0 = advance(*r.lead0, 0.0, h);
  if (r.lead1) lead1 = advance(*r.lead1, 0.0, h);

  for (int j = 0; j < 2; ++j) {
    if (lead0) out.drac_lag0_lead0[keep][j] = drac(*lead0, lag0_keep);
    if (lead1) out.drac_lag0_lead1[change][j] = drac(*lead1, lag0_change);
    if (r.lag1) {
      const ActorState lag1 = advance(*r.lag1, a_lag1[j], h);
      out.drac_lag1_lag0[change][j] = drac(lag0_change, lag1);
      if (lead1) {
        out.drac_lag1_lead1[keep][j] = drac(*lead1, lag1);
        out.drac_lag1_lead1[change][j] = out.drac_lag1_lead1[keep][j];
      }
    }
  }
  return out;
}

}  // namespace mergesim
