#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mergesim/optimizer.hpp"

using namespace mergesim;

namespace {

double sphere(const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - 0.3 * static_cast<double>(i + 1)) * (x[i] - 0.3 * static_cast<double>(i + 1));
  return s;
}

double rosenbrock(const std::vector<double>& x) {
  return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

}  // namespace

TEST(Bounds, ValidateAndClamp) {
  Bounds b{{0.0, -1.0}, {1.0, 1.0}};
  EXPECT_NO_THROW(b.validate());
  EXPECT_EQ(b.clamp({2.0, -5.0}), (std::vector<double>{1.0, -1.0}));
  EXPECT_THROW((Bounds{{0.0}, {0.0}}).validate(), std::invalid_argument);
  EXPECT_THROW((Bounds{{0.0}, {1.0, 2.0}}).validate(), std::invalid_argument);
  EXPECT_THROW((Bounds{{0.0}, {INFINITY}}).validate(), std::invalid_argument);
}

TEST(NelderMead, QuadraticConverges) {
  Bounds b{std::vector<double>(3, -2.0), std::vector<double>(3, 2.0)};
  NelderMeadOptions opt;
  opt.max_evals = 2000;
  opt.xtol = 1e-7;
  opt.ftol = 1e-14;
  const auto r = bounded_nelder_mead(sphere, {1.5, -1.5, 1.9}, b, opt);
  EXPECT_LT(r.f, 1e-8);
  EXPECT_NEAR(r.x[2], 0.9, 1e-3);
  EXPECT_LE(r.evals, opt.max_evals);
}

TEST(NelderMead, RosenbrockConverges) {
  Bounds b{{-2.0, -2.0}, {2.0, 2.0}};
  NelderMeadOptions opt;
  opt.max_evals = 5000;
  opt.xtol = 1e-9;
  opt.ftol = 1e-16;
  opt.restarts = 4;
  const auto r = bounded_nelder_mead(rosenbrock, {-1.2, 1.0}, b, opt);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], 1.0, 2e-3);
}

TEST(NelderMead, MinimumOnBoundary) {
  Bounds b{{0.0, 0.0}, {1.0, 1.0}};
  auto f = [](const std::vector<double>& x) { return x[0] + x[1]; };
  NelderMeadOptions opt;
  opt.max_evals = 1000;
  const auto r = bounded_nelder_mead(f, {0.7, 0.9}, b, opt);
  EXPECT_NEAR(r.f, 0.0, 1e-6);
}

TEST(NelderMead, NaNTreatedAsInfinite) {
  Bounds b{{-1.0}, {1.0}};
  auto f = [](const std::vector<double>& x) { return x[0] > 0.5 ? std::nan("") : x[0] * x[0]; };
  const auto r = bounded_nelder_mead(f, {0.2}, b);
  EXPECT_LT(r.f, 0.04);
  EXPECT_THROW(bounded_nelder_mead(f, {0.2, 0.1}, b), std::invalid_argument);
}

// Properties on random piecewise-constant objectives (like success-rate
// costs): the result never exceeds the start value, stays inside the box,
// respects the evaluation budget, and is reproducible.
TEST(NelderMeadProperty, NeverWorseInBoundsDeterministic) {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + trial % 8;
    Bounds b{std::vector<double>(dim), std::vector<double>(dim)};
    std::vector<double> centre(dim), x0(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      b.lo[d] = -5.0 * u(rng);
      b.hi[d] = b.lo[d] + 0.1 + 10.0 * u(rng);
      centre[d] = b.lo[d] + u(rng) * (b.hi[d] - b.lo[d]);
      x0[d] = b.lo[d] + u(rng) * (b.hi[d] - b.lo[d]);
    }
    auto f = [&](const std::vector<double>& x) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += std::floor(std::abs(x[d] - centre[d]) * 4.0);
      return s;
    };
    NelderMeadOptions opt;
    opt.max_evals = 150;
    const auto r = bounded_nelder_mead(f, x0, b, opt);
    EXPECT_LE(r.f, f(x0));
    EXPECT_DOUBLE_EQ(r.f, f(r.x));
    EXPECT_LE(r.evals, opt.max_evals);
    for (std::size_t d = 0; d < dim; ++d) {
      EXPECT_GE(r.x[d], b.lo[d]);
      EXPECT_LE(r.x[d], b.hi[d]);
    }
    const auto again = bounded_nelder_mead(f, x0, b, opt);
    EXPECT_EQ(again.x, r.x);
  }
}

TEST(Multistart, StartPointsAreReproducibleAndInside) {
  Bounds b{{0.0, -3.0}, {4.0, 3.0}};
  EXPECT_EQ(start_point(b, 7, 3), start_point(b, 7, 3));
  EXPECT_NE(start_point(b, 7, 3), start_point(b, 7, 4));
  EXPECT_NE(start_point(b, 7, 3), start_point(b, 8, 3));
  for (std::size_t i = 0; i < 100; ++i) {
    const auto x = start_point(b, 1, i);
    EXPECT_GE(x[0], 0.0);
    EXPECT_LT(x[0], 4.0);
    EXPECT_GE(x[1], -3.0);
    EXPECT_LT(x[1], 3.0);
  }
}

TEST(Multistart, TiesGoToLowestIndex) {
  Bounds b{{0.0}, {1.0}};
  auto flat = [](const std::vector<double>&) { return 1.0; };
  const auto r = multistart(flat, b, 5, 1);
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_EQ(r.trace.size(), 5u);
  EXPECT_EQ(r.best_x, r.trace[0].x);
}

TEST(Multistart, BestIsMinimumOfTrace) {
  Bounds b{{-2.0, -2.0}, {2.0, 2.0}};
  const auto r = multistart(rosenbrock, b, 8, 5);
  for (const auto& rec : r.trace) {
    EXPECT_GE(rec.f, r.best_f);
    EXPECT_LE(rec.f, rec.f0);
  }
  EXPECT_DOUBLE_EQ(r.trace[r.best_index].f, r.best_f);
}

TEST(Multistart, ThreadedMatchesSerial) {
  Bounds b{{-2.0, -2.0}, {2.0, 2.0}};
  const auto serial = multistart(rosenbrock, b, 9, 13, {}, 1);
  const auto threaded = multistart(rosenbrock, b, 9, 13, {}, 4);
  EXPECT_EQ(serial.best_index, threaded.best_index);
  EXPECT_EQ(serial.best_x, threaded.best_x);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(serial.trace[i].x, threaded.trace[i].x);
  EXPECT_THROW(multistart(rosenbrock, b, 0, 1), std::invalid_argument);
}
