#pragma once

// Shared test fixtures: the 20-scene decision suite, the extraction fixture,
// and an independent closed-form oracle for 2x2 bimatrix games.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mergesim/scene.hpp"
#include "mergesim/trajectory_log.hpp"

namespace fixtures {

using mergesim::ActorState;
using mergesim::RoleStates;

inline ActorState actor(std::string id, int lane, double s, double v) {
  ActorState a;
  a.id = std::move(id);
  a.lane = lane;
  a.s = s;
  a.v = v;
  return a;
}

struct SuiteScene {
  std::string name;
  bool pressure = false;
  RoleStates roles;
};

/// Ten benign scenes (merging actor absent or well ahead at matched speed,
/// tight passing-lane gap) and ten high-pressure scenes (slow merging actor a
/// few meters ahead of Lag0, wide passing-lane gap).
inline std::vector<SuiteScene> scene_suite() {
  std::vector<SuiteScene> out;
  for (int i = 0; i < 10; ++i) {
    SuiteScene sc;
    sc.name = "benign-" + std::to_string(i);
    const double v = 22.0 + 0.6 * i;
    sc.roles.lag0 = actor("lag0", 0, 100.0, v);
    if (i % 3 != 0) sc.roles.ma = actor("ma", -1, 100.0 + 42.0 + 1.5 * i, v + 0.5);
    sc.roles.lead0 = actor("lead0", 0, 100.0 + 55.0 + 2.0 * i, v);
    sc.roles.lag1 = actor("lag1", 1, 100.0 - 12.0 - i, v + 2.0);
    sc.roles.lead1 = actor("lead1", 1, 100.0 + 20.0 + i, v + 1.0);
    if (i % 2 == 0) sc.roles.follow0 = actor("fol0", 0, 100.0 - 40.0, v);
    out.push_back(sc);
  }
  for (int i = 0; i < 10; ++i) {
    SuiteScene sc;
    sc.name = "pressure-" + std::to_string(i);
    sc.pressure = true;
    const double v = 22.0 + 0.6 * i;
    sc.roles.lag0 = actor("lag0", 0, 100.0, v);
    sc.roles.ma = actor("ma", -1, 100.0 + 9.0 + 0.7 * i, v - 6.0 - 0.3 * i);
    sc.roles.lead0 = actor("lead0", 0, 100.0 + 70.0, v);
    if (i % 4 != 3) sc.roles.lag1 = actor("lag1", 1, 100.0 - 70.0 - 2.0 * i, v);
    if (i % 5 != 4) sc.roles.lead1 = actor("lead1", 1, 100.0 + 95.0 + 2.0 * i, v + 3.0);
    if (i % 2 == 1) sc.roles.follow0 = actor("fol0", 0, 100.0 - 45.0, v);
    out.push_back(sc);
  }
  return out;
}

/// Expected outcome of the extraction fixture.
struct ExpectedEvent {
  std::string id;
  std::string label;
};

/// 12 s log at 10 Hz with seven lag-vehicle candidates in separate clusters:
///   q1  10 m behind its merging actor throughout          -> KS event
///   q2  same, moves to the passing lane at 7.0 s          -> LC event
///   q3  same, with a passing-lane follower throughout     -> KS event
///   d1  close for 4 s only                                -> rejected (< 5 s)
///   d2  close, then drives onto the on-ramp at 8 s        -> rejected (ramp)
///   d3  70 m behind throughout                            -> rejected (> 60 m)
///   d4  close throughout, passing-lane follower 2-6 s only -> rejected (Lag1 trim)
inline std::vector<mergesim::Frame> extraction_fixture() {
  const double dt = 0.1;
  const double v = 15.0;
  std::vector<mergesim::Frame> frames;
  const std::vector<std::string> clusters{"q1", "q2", "q3", "d1", "d2", "d3", "d4"};
  for (int k = 0; k < 120; ++k) {
    const double t = k * dt;
    mergesim::Frame f{k, t, {}};
    auto add = [&](ActorState a) { f.actors.push_back({a, "-", "-"}); };
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const std::string& id = clusters[c];
      const double base = 300.0 + 500.0 * static_cast<double>(c) + v * t;  // merging actor position
      add(actor("ma-" + id, -1, base, v));
      double offset = -10.0;
      int lane = 0;
      if (id == "q2" && k >= 70) lane = 1;
      if (id == "d1" && k >= 40) offset = -100.0;
      if (id == "d2" && k >= 80) lane = -1;
      if (id == "d3") offset = -70.0;
      add(actor(id, lane, base + offset, v));
      if (id == "q3") add(actor("p-" + id, 1, base + offset - 20.0, v));
      if (id == "d4" && k >= 20 && k < 60) add(actor("p-" + id, 1, base + offset - 20.0, v));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

inline mergesim::LaneTopology extraction_topology() {
  mergesim::LaneTopology t;
  t.ramp_end_s = 6000.0;
  t.road_length = 8000.0;
  return t;
}

inline std::vector<ExpectedEvent> extraction_expected() {
  return {{"evt-q1-0", "KS"}, {"evt-q2-0", "LC"}, {"evt-q3-0", "KS"}};
}

/// All Nash equilibria of a 2x2 bimatrix game in closed form. Rows are the
/// row player's pure strategies, columns the column player's; a profile is
/// (p, q) = probabilities of row 0 and column 0.
struct Profile2 {
  double p;
  double q;
};

struct Oracle2 {
  std::vector<Profile2> equilibria;
  bool degenerate = false;
};

inline Oracle2 nash_oracle_2x2(const double a[2][2], const double b[2][2]) {
  Oracle2 o;
  // Degenerate: some pure strategy has two equal best responses.
  for (int j = 0; j < 2; ++j)
    if (a[0][j] == a[1][j]) o.degenerate = true;
  for (int i = 0; i < 2; ++i)
    if (b[i][0] == b[i][1]) o.degenerate = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const bool row_best = a[i][j] >= a[1 - i][j];
      const bool col_best = b[i][j] >= b[i][1 - j];
      if (row_best && col_best) o.equilibria.push_back({i == 0 ? 1.0 : 0.0, j == 0 ? 1.0 : 0.0});
    }
  // Fully mixed: each player makes the other indifferent.
  const double da = a[0][0] - a[0][1] - a[1][0] + a[1][1];
  const double db = b[0][0] - b[0][1] - b[1][0] + b[1][1];
  if (da != 0.0 && db != 0.0) {
    const double q = (a[1][1] - a[0][1]) / da;
    const double p = (b[1][1] - b[1][0]) / db;
    if (p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) o.equilibria.push_back({p, q});
  }
  return o;
}

/// Largest unilateral gain available to either player at (p, q).
inline double regret_2x2(const double a[2][2], const double b[2][2], double p, double q) {
  const double x[2] = {p, 1.0 - p};
  const double y[2] = {q, 1.0 - q};
  double ua = 0, ub = 0, best_a = -1e300, best_b = -1e300;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      ua += x[i] * y[j] * a[i][j];
      ub += x[i] * y[j] * b[i][j];
    }
  for (int i = 0; i < 2; ++i) best_a = std::max(best_a, y[0] * a[i][0] + y[1] * a[i][1]);
  for (int j = 0; j < 2; ++j) best_b = std::max(best_b, x[0] * b[0][j] + x[1] * b[1][j]);
  return std::max(best_a - ua, best_b - ub);
}

}  // namespace fixtures
