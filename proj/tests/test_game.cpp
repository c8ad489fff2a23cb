#include <gtest/gtest.h>

#include <random>

#include "mergesim/game.hpp"
#include "mergesim/presets.hpp"
#include "support/fixtures.hpp"

using namespace mergesim;
using fixtures::actor;

TEST(BuildPayoffs, ZeroWeightsGiveZeroMatrices) {
  AccelProjection proj;
  proj.lag0_accel = {{{1.0, 2.0}, {3.0, 4.0}}};
  proj.drac_lag0_lead0 = {{{1.0, 1.0}, {0.0, 0.0}}};
  const auto pay = build_payoffs(proj, MbrgtParams{});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_DOUBLE_EQ(pay.lag0[i][j], 0.0);
      EXPECT_DOUBLE_EQ(pay.lag1[i][j], 0.0);
    }
}

TEST(BuildPayoffs, LaneBiasSignsAndLaneFlip) {
  MbrgtParams p;
  p.w[4] = 1.0;
  const auto cruising = build_payoffs(AccelProjection{}, p, true);
  EXPECT_DOUBLE_EQ(cruising.lag0[0][0], 1.0);
  EXPECT_DOUBLE_EQ(cruising.lag0[0][1], 1.0);
  EXPECT_DOUBLE_EQ(cruising.lag0[1][0], -1.0);
  EXPECT_DOUBLE_EQ(cruising.lag0[1][1], -1.0);
  const auto passing = build_payoffs(AccelProjection{}, p, false);
  EXPECT_DOUBLE_EQ(passing.lag0[0][0], -1.0);
  EXPECT_DOUBLE_EQ(passing.lag0[1][0], 1.0);
}

TEST(BuildPayoffs, DracsArePenalties) {
  AccelProjection proj;
  proj.lag0_accel = {{{0.5, 0.5}, {0.2, 0.2}}};
  proj.drac_lag0_lead1[1][0] = 2.0;
  proj.drac_lag1_lag0[1][0] = 3.0;
  proj.drac_lag0_lead0[0][1] = 4.0;
  proj.lag1_accel = {{{0.1, -0.5}, {0.1, -0.5}}};
  proj.drac_lag1_lead1[0][0] = 1.0;
  MbrgtParams p;
  p.w = {1.0, 2.0, 3.0, 4.0, 0.0};
  p.u = {1.0, 2.0, 3.0};
  const auto pay = build_payoffs(proj, p);
  EXPECT_DOUBLE_EQ(pay.lag0[1][0], 0.2 - 2.0 * 2.0 - 3.0 * 3.0);
  EXPECT_DOUBLE_EQ(pay.lag0[0][1], 0.5 - 4.0 * 4.0);
  EXPECT_DOUBLE_EQ(pay.lag1[1][0], 0.1 - 3.0 * 3.0);
  EXPECT_DOUBLE_EQ(pay.lag1[0][0], 0.1 - 2.0 * 1.0);
  EXPECT_DOUBLE_EQ(pay.lag1[0][1], -0.5);
}

TEST(Qre, Examples) {
  const std::vector<double> equal{1.0, 1.0};
  auto p = qre_probabilities(equal, 2.0);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  const std::vector<double> e{0.0, std::log(3.0)};
  p = qre_probabilities(e, 1.0);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
  const std::vector<double> big{0.0, 1e6};
  p = qre_probabilities(big, 1e-3);  // no overflow
  EXPECT_DOUBLE_EQ(p[1], 1.0);
  EXPECT_THROW(qre_probabilities(e, 0.0), std::invalid_argument);
  EXPECT_THROW(qre_probabilities(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST(QreProperty, SumsToOneAndOrdersByPayoff) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-50.0, 50.0), b(0.01, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> e{u(rng), u(rng)};
    const auto p = qre_probabilities(e, b(rng));
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
    if (e[0] > e[1]) {
      EXPECT_GE(p[0], p[1]);
    }
  }
}

TEST(Alpha, Examples) {
  EXPECT_DOUBLE_EQ(alpha_from_density(10.0, {1.0, 0.0, 0.0, 0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(alpha_from_density(10.0, {0.0, 1.0, 0.0, 0.0, 0.0}), 10.0);
  EXPECT_DOUBLE_EQ(alpha_from_density(2.0, {1.0, 2.0, 3.0, 0.0, 0.0}), 17.0);
  EXPECT_THROW(alpha_from_density(-1.0, {1.0, 0.0, 0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST(BetaSchedule, Examples) {
  EXPECT_DOUBLE_EQ(beta_schedule(1.0, 0.5, 0.1, 4.0), 4.0);
  EXPECT_NEAR(beta_schedule(1e6, 0.5, 0.1, 4.0), 0.5, 1e-12);
  EXPECT_NEAR(beta_schedule(1.0 + std::log(2.0) / 0.1, 0.5, 0.1, 3.5), 2.0, 1e-12);
  EXPECT_THROW(beta_schedule(0.5, 0.5, 0.1, 4.0), std::invalid_argument);
}

TEST(Density, CountsPassingLaneWithinWindow) {
  std::vector<ActorState> scene{actor("lag0", 0, 500, 20), actor("a", 1, 400, 20), actor("b", 1, 600, 20),
                                actor("c", 1, 601, 20), actor("d", 0, 510, 20)};
  EXPECT_DOUBLE_EQ(passing_lane_density(scene, scene[0]), 10.0);
}

TEST(MbrgtParams, Validation) {
  MbrgtParams p;
  EXPECT_NO_THROW(p.validate());
  p.beta_min = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.w[2] = std::nan("");
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(MbrgtDecide, PresetsOnSuite) {
  IdmParams idm;
  const auto ks = mbrgt_from_vector(load_preset("mbrgt-ks"));
  const auto lc = mbrgt_from_vector(load_preset("mbrgt-lc"));
  for (const auto& sc : fixtures::scene_suite()) {
    const auto proj = project_accelerations(sc.roles, idm);
    const auto& params = sc.pressure ? lc : ks;
    const Action want = sc.pressure ? Action::ChangeLanes : Action::KeepStraight;
    EXPECT_EQ(mbrgt_decide(proj, params, 1.0, 0.0).action, want) << sc.name;
  }
}

TEST(MbrgtDecide, ArgmaxIsIndependentOfRationality) {
  IdmParams idm;
  const auto base = mbrgt_from_vector(load_preset("mbrgt-lc"));
  for (const auto& sc : fixtures::scene_suite()) {
    const auto proj = project_accelerations(sc.roles, idm);
    const Action ref = mbrgt_decide(proj, base, 1.0, 0.0).action;
    for (double t : {1.0, 5.0, 60.0})
      for (double k : {0.0, 10.0, 40.0}) {
        MbrgtParams p = base;
        p.m = {0.2, 0.05, 0.0, 0.0, 0.0};
        EXPECT_EQ(mbrgt_decide(proj, p, t, k).action, ref) << sc.name;
      }
  }
}

TEST(MbrgtDecide, StochasticModeMatchesProbability) {
  AccelProjection proj;
  MbrgtParams p;
  p.w[4] = -std::log(3.0) / 2.0;  // change favored: payoffs -c vs +c
  p.m = {1.0, 0.0, 0.0, 0.0, 0.0};
  p.mode = DecisionMode::Stochastic;
  const double prob = mbrgt_decide(proj, p, 1.0, 0.0).probability_change;
  EXPECT_NEAR(prob, 0.75, 1e-12);
  std::mt19937_64 rng(52);
  int changes = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) changes += mbrgt_decide(proj, p, 1.0, 0.0, rng).action == Action::ChangeLanes;
  EXPECT_NEAR(changes / double(n), 0.75, 0.015);
}

TEST(MbrgtDecide, TiesKeepStraight) {
  const auto d = mbrgt_decide(AccelProjection{}, MbrgtParams{}, 1.0, 0.0);
  EXPECT_EQ(d.action, Action::KeepStraight);
  EXPECT_DOUBLE_EQ(d.probability_change, 0.5);
}
