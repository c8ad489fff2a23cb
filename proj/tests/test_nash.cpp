#include <gtest/gtest.h>

#include <random>

#include "mergesim/nash.hpp"
#include "support/fixtures.hpp"

using namespace mergesim;

namespace {

bool close_to(const Equilibrium& e, const fixtures::Profile2& p, double tol = 1e-7) {
  return std::abs(e.row[0] - p.p) <= tol && std::abs(e.col[0] - p.q) <= tol;
}

}  // namespace

TEST(DenseMatrix, RejectsRaggedInit) {
  EXPECT_THROW((DenseMatrix{{1.0, 2.0}, {3.0}}), std::invalid_argument);
  DenseMatrix m{{1.0, 2.0}, {3.0, 4.0}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_DOUBLE_EQ(m(1, 0), 3.0);
}

TEST(LemkeHowson, InputValidation) {
  DenseMatrix a{{1.0, 2.0}}, b{{1.0}, {2.0}};
  EXPECT_THROW(lemke_howson(a, b), std::invalid_argument);
  DenseMatrix n{{std::nan(""), 0.0}, {0.0, 0.0}};
  EXPECT_THROW(lemke_howson(n, n), std::invalid_argument);
  DenseMatrix z{{0.0, 0.0}, {0.0, 0.0}};
  EXPECT_THROW(lemke_howson(z, z, 4), std::invalid_argument);
}

TEST(LemkeHowson, DominantStrategies) {
  // Prisoner's dilemma: defect (index 1) dominates for both.
  DenseMatrix a{{-1.0, -3.0}, {0.0, -2.0}};
  DenseMatrix b{{-1.0, 0.0}, {-3.0, -2.0}};
  const auto e = lemke_howson(a, b);
  EXPECT_NEAR(e.row[1], 1.0, 1e-12);
  EXPECT_NEAR(e.col[1], 1.0, 1e-12);
  EXPECT_EQ(e.path, SolverPath::LemkeHowson);
}

TEST(LemkeHowson, MatchingPennies) {
  DenseMatrix a{{1.0, -1.0}, {-1.0, 1.0}};
  DenseMatrix b{{-1.0, 1.0}, {1.0, -1.0}};
  const auto e = lemke_howson(a, b);
  EXPECT_NEAR(e.row[0], 0.5, 1e-9);
  EXPECT_NEAR(e.col[0], 0.5, 1e-9);
}

TEST(LemkeHowson, IdenticalRowsStillEquilibrium) {
  DenseMatrix a{{2.0, 2.0}, {2.0, 2.0}};
  DenseMatrix b{{1.0, 0.0}, {1.0, 0.0}};
  const auto e = lemke_howson(a, b);
  EXPECT_TRUE(is_epsilon_nash(a, b, e.row, e.col, 1e-9));
}

TEST(LemkeHowson, AllZeroGame) {
  DenseMatrix z{{0.0, 0.0}, {0.0, 0.0}};
  const auto e = lemke_howson(z, z);
  EXPECT_TRUE(is_epsilon_nash(z, z, e.row, e.col, 1e-12));
}

TEST(LemkeHowson, EveryInitialLabelGivesEquilibrium) {
  DenseMatrix a{{3.0, 0.0}, {0.0, 2.0}};
  DenseMatrix b{{2.0, 0.0}, {0.0, 3.0}};
  for (std::size_t l = 0; l < 4; ++l) {
    const auto e = lemke_howson(a, b, l);
    EXPECT_TRUE(is_epsilon_nash(a, b, e.row, e.col, 1e-9)) << l;
  }
}

TEST(LemkeHowson, LargerGame) {
  // Rock-paper-scissors, unique uniform equilibrium.
  DenseMatrix a{{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}};
  DenseMatrix b{{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}};
  const auto e = lemke_howson(a, b);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(e.row[i], 1.0 / 3.0, 1e-9);
    EXPECT_NEAR(e.col[i], 1.0 / 3.0, 1e-9);
  }
}

TEST(SupportEnumeration, FindsMixedEquilibrium) {
  DenseMatrix a{{1.0, -1.0}, {-1.0, 1.0}};
  DenseMatrix b{{-1.0, 1.0}, {1.0, -1.0}};
  const auto e = support_enumeration(a, b);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->path, SolverPath::SupportEnumeration);
  EXPECT_NEAR(e->row[0], 0.5, 1e-9);
}

TEST(NashRegret, PureDeviation) {
  DenseMatrix a{{1.0, 0.0}, {0.0, 1.0}}, b = a;
  EXPECT_DOUBLE_EQ(nash_regret(a, b, {1.0, 0.0}, {0.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(nash_regret(a, b, {1.0, 0.0}, {1.0, 0.0}), 0.0);
}

// Property: on random 2x2 games the solver returns a profile with negligible
// regret that coincides with one of the closed-form equilibria.
TEST(LemkeHowsonProperty, AgreesWithClosedFormOracle) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> small(-2, 2);
  for (int trial = 0; trial < 2000; ++trial) {
    double a[2][2], b[2][2];
    const bool integer = trial % 4 == 0;  // exercise ties and degeneracy
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        a[i][j] = integer ? small(rng) : u(rng);
        b[i][j] = integer ? small(rng) : u(rng);
      }
    const DenseMatrix A{{a[0][0], a[0][1]}, {a[1][0], a[1][1]}};
    const DenseMatrix B{{b[0][0], b[0][1]}, {b[1][0], b[1][1]}};
    const auto e = lemke_howson(A, B, static_cast<std::size_t>(trial % 4));
    const double scale = 1e-9 * 10.0;
    EXPECT_LE(fixtures::regret_2x2(a, b, e.row[0], e.col[0]), scale);
    const auto oracle = fixtures::nash_oracle_2x2(a, b);
    if (oracle.degenerate) continue;
    bool matched = false;
    for (const auto& p : oracle.equilibria) matched = matched || close_to(e, p);
    EXPECT_TRUE(matched) << "trial " << trial;
    EXPECT_EQ(e.path, SolverPath::LemkeHowson) << "trial " << trial;
  }
}
