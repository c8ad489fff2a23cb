#pragma once

#include <stdexcept>
#include <string>

#include "mergesim/decision.hpp"
#include "mergesim/longitudinal.hpp"

namespace mergesim {

/// MOBIL parameters. The lane bias is folded into `da_th`.
struct MobilParams {
  double b_safe = 3.26;  // m/s^2
  double da_th = 1.35;   // m/s^2
  double p = 1.91;       // politeness

  void validate() const {
    if (!(p > -3.0 && p < 3.0)) throw std::invalid_argument("mobil.p: must lie in (-3, 3)");
    if (!(b_safe > 0.0 && b_safe < 4.0))
      throw std::invalid_argument("mobil.b_safe: must lie in (0, 4)");
    if (!(da_th > 0.0 && da_th < 4.0))
      throw std::invalid_argument("mobil.da_th: must lie in (0, 4)");
  }
};

/// The three differences MOBIL looks at plus the safety cell.
struct MobilInputs {
  double own_gain = 0.0;       // a~_c - a_c
  double new_follower_loss = 0.0;  // a_n - a~_n
  double old_follower_loss = 0.0;  // a_o - a~_o
  double new_follower_after = 0.0; // a~_n

  static MobilInputs from(const AccelProjection& proj, const FollowerAccels& f) noexcept {
    constexpr int j = index_of(FollowerAction::NotYield);
    MobilInputs in;
    in.own_gain = proj.lag0_accel[index_of(Action::ChangeLanes)][j] -
                  proj.lag0_accel[index_of(Action::KeepStraight)][j];
    in.new_follower_loss = f.new_before - f.new_after;
    in.old_follower_loss = f.old_before - f.old_after;
    in.new_follower_after = f.new_after;
    return in;
  }
};

inline Action mobil_decide(const MobilInputs& in, const MobilParams& params) noexcept {
  const bool safe = in.new_follower_after >= -params.b_safe;
  const bool incentive =
      in.own_gain > params.p * (in.new_follower_loss + in.old_follower_loss) + params.da_th;
  return safe && incentive ? Action::ChangeLanes : Action::KeepStraight;
}

inline Decision mobil_decide(const AccelProjection& proj, const FollowerAccels& followers,
                             const MobilParams& params) noexcept {
  const Action a = mobil_decide(MobilInputs::from(proj, followers), params);
  return Decision{a, a == Action::ChangeLanes ? 1.0 : 0.0, SolverPath::LemkeHowson};
}

}  // namespace mergesim
