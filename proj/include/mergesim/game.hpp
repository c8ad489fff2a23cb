#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mergesim/decision.hpp"
#include "mergesim/drac.hpp"
#include "mergesim/longitudinal.hpp"
#include "mergesim/nash.hpp"
#include "mergesim/scene.hpp"

namespace mergesim {

enum class DecisionMode { Deterministic, Stochastic };

/// Merge-adapted bounded-rationality game parameters.
///   w: Lag0 weights on (acceleration, DRAC to Lead1, DRAC imposed on Lag1,
///      DRAC to Lead0, lane bias)
///   u: Lag1 weights on (acceleration, DRAC to Lead1, DRAC to Lag0)
struct MbrgtParams {
  std::array<double, 5> w{0.0, 0.0, 0.0, 0.0, 0.0};
  std::array<double, 3> u{0.0, 0.0, 0.0};
  double beta_min = 0.5;
  double delta_r = 0.1;  // 1/s
  std::array<double, 5> m{1.0, 0.0, 0.0, 0.0, 0.0};
  DecisionMode mode = DecisionMode::Deterministic;

  void validate() const {
    for (double x : w)
      if (!std::isfinite(x)) throw std::invalid_argument("mbrgt.w: non-finite weight");
    for (double x : u)
      if (!std::isfinite(x)) throw std::invalid_argument("mbrgt.u: non-finite weight");
    for (double x : m)
      if (!std::isfinite(x)) throw std::invalid_argument("mbrgt.m: non-finite coefficient");
    if (!(beta_min > 0.0)) throw std::invalid_argument("mbrgt.beta_min: must be > 0");
    if (!(delta_r >= 0.0)) throw std::invalid_argument("mbrgt.delta_r: must be >= 0");
  }
};

/// Rows: Lag0 action (keep, change). Columns: Lag1 action (not yield, yield).
struct PayoffPair {
  Matrix2 lag0{};
  Matrix2 lag1{};
};

/// Payoff matrices of the Lag0/Lag1 game. DRACs are required decelerations and
/// enter with a negative sign, so positive weights penalize unsafe cells.
/// The lane-bias term is w5 * lambda1 * lambda2 with lambda1 = +1 for keep and
/// -1 for change, and lambda2 fixed by the prospective target lane: +1 when
/// Lag0 would move into the passing lane, -1 when into the cruising lane.
inline PayoffPair build_payoffs(const AccelProjection& proj, const MbrgtParams& prm,
                                bool lag0_in_cruising = true) {
  const double lambda2 = lag0_in_cruising ? 1.0 : -1.0;
  PayoffPair out;
  for (int i = 0; i < 2; ++i) {
    const double lambda1 = i == index_of(Action::KeepStraight) ? 1.0 : -1.0;
    for (int j = 0; j < 2; ++j) {
      out.lag0[i][j] = prm.w[0] * proj.lag0_accel[i][j] - prm.w[1] * proj.drac_lag0_lead1[i][j] -
                       prm.w[2] * proj.drac_lag1_lag0[i][j] - prm.w[3] * proj.drac_lag0_lead0[i][j] +
                       prm.w[4] * lambda1 * lambda2;
      out.lag1[i][j] = prm.u[0] * proj.lag1_accel[i][j] - prm.u[1] * proj.drac_lag1_lead1[i][j] -
                       prm.u[2] * proj.drac_lag1_lag0[i][j];
    }
  }
  return out;
}

/// Logit choice probabilities exp(E_i / beta) / sum exp(E_k / beta).
inline std::vector<double> qre_probabilities(std::span<const double> expected, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("qre_probabilities: beta must be > 0");
  if (expected.empty()) throw std::invalid_argument("qre_probabilities: empty payoff vector");
  const double top = *std::max_element(expected.begin(), expected.end());
  std::vector<double> p(expected.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!std::isfinite(expected[i])) throw std::invalid_argument("qre_probabilities: non-finite payoff");
    p[i] = std::exp((expected[i] - top) / beta);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

/// Initial rationality from passing-lane density: sum m_i k^i, i = 0..4.
inline double alpha_from_density(double k, const std::array<double, 5>& m) {
  if (!(k >= 0.0)) throw std::invalid_argument("alpha_from_density: k must be >= 0");
  double acc = 0.0;
  for (auto it = m.rbegin(); it != m.rend(); ++it) acc = acc * k + *it;
  return acc;
}

/// Rationality decaying from alpha at t = 1 s towards beta_min.
inline double beta_schedule(double t, double beta_min, double delta_r, double alpha) {
  if (!(t >= 1.0)) throw std::invalid_argument("beta_schedule: t must be >= 1");
  return beta_min + (alpha - beta_min) * std::exp(-delta_r * (t - 1.0));
}

/// Smallest temperature handed to the logit; alpha polynomials can push the
/// schedule to zero or below.
inline constexpr double kMinBeta = 1e-9;

/// Passing-lane vehicles within +-100 m of `lag0`, in vehicles per km.
inline double passing_lane_density(std::span<const ActorState> scene, const ActorState& lag0) {
  constexpr double half_window = 100.0;
  int count = 0;
  for (const ActorState& a : scene) {
    if (a.id == lag0.id || a.lane != kPassingLane) continue;
    if (std::abs(a.s - lag0.s) <= half_window) ++count;
  }
  return count / (2.0 * half_window / 1000.0);
}

/// Equilibrium-based decision on a prebuilt projection. Lemke-Howson gives
/// Lag1's (possibly mixed) response; Lag0 scores its actions against it. The
/// returned action is the payoff argmax (ties keep straight), and
/// probability_change is the logit probability at beta(t).
inline Decision mbrgt_decide(const AccelProjection& proj, const MbrgtParams& prm, double t,
                             double density) {
  const PayoffPair pay = build_payoffs(proj, prm, true);
  const Equilibrium eq = lemke_howson(pay.lag0, pay.lag1, index_of(Action::KeepStraight));
  const auto expected = row_payoffs(DenseMatrix::from(pay.lag0), eq.col);
  const double beta = std::max(
      kMinBeta, beta_schedule(std::max(1.0, t), prm.beta_min, prm.delta_r,
                              alpha_from_density(density, prm.m)));
  const auto prob = qre_probabilities(expected, beta);
  Decision d;
  d.action = expected[index_of(Action::ChangeLanes)] > expected[index_of(Action::KeepStraight)]
                 ? Action::ChangeLanes
                 : Action::KeepStraight;
  d.probability_change = prob[index_of(Action::ChangeLanes)];
  d.solver = eq.path;
  return d;
}

/// As above, honoring `prm.mode`: stochastic mode samples the logit distribution.
template <typename Urbg>
Decision mbrgt_decide(const AccelProjection& proj, const MbrgtParams& prm, double t, double density,
                      Urbg& rng) {
  Decision d = mbrgt_decide(proj, prm, t, density);
  if (prm.mode == DecisionMode::Stochastic) {
    std::bernoulli_distribution draw(d.probability_change);
    d.action = draw(rng) ? Action::ChangeLanes : Action::KeepStraight;
  }
  return d;
}

template <typename Urbg>
Decision mbrgt_decide(const RoleStates& roles, const IdmParams& idm, const MbrgtParams& prm, double t,
                      double density, Urbg& rng, const ProjectionOptions& opt = {}) {
  return mbrgt_decide(project_accelerations(roles, idm, opt), prm, t, density, rng);
}

}  // namespace mergesim
