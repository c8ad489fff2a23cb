#pragma once

#include "mergesim/scene.hpp"

namespace mergesim {

/// Cap applied when the follower is closing and the gap has vanished.
inline constexpr double kDracMax = 10.0;

/// Deceleration rate to avoid a crash for `follower` behind `leader`, m/s^2.
/// Zero unless the follower is faster; the denominator subtracts the
/// follower length.
inline double drac(const ActorState& leader, const ActorState& follower) noexcept {
  if (follower.v <= leader.v) return 0.0;
  const double gap = drac_gap(leader, follower);
  if (gap <= 0.0) return kDracMax;
  const double dv = leader.v - follower.v;
  return std::min(kDracMax, dv * dv / gap);
}

}  // namespace mergesim
