#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mergesim {

using ActorId = std::string;

inline constexpr int kRampLane = -1;
inline constexpr int kCruisingLane = 0;
inline constexpr int kPassingLane = 1;

/// Longitudinal window (meters) within which a merging actor interacts with
/// the lag vehicle. Shared by role assignment, MR-IDM and event extraction.
inline constexpr double kInteractionRadius = 60.0;

/// Straight road in road-aligned coordinates. Lane -1 is the on-ramp on the
/// right, lane 0 the cruising lane, lane 1 the passing lane. Lateral
/// coordinates grow to the left, so lane k is centered at k * lane_width.
struct LaneTopology {
  std::vector<int> lanes{kRampLane, kCruisingLane, kPassingLane};
  double lane_width = 3.7;
  double ramp_end_s = 400.0;
  double road_length = 2000.0;

  void validate() const {
    if (lanes.empty()) throw std::invalid_argument("topology.lanes: empty");
    std::vector<int> sorted = lanes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] != sorted[i - 1] + 1)
        throw std::invalid_argument("topology.lanes: ids must be contiguous");
    }
    for (int required : {kRampLane, kCruisingLane, kPassingLane}) {
      if (!std::binary_search(sorted.begin(), sorted.end(), required))
        throw std::invalid_argument("topology.lanes: must contain -1, 0 and 1");
    }
    if (!(lane_width > 0.0)) throw std::invalid_argument("topology.lane_width: must be > 0");
    if (!(ramp_end_s > 0.0)) throw std::invalid_argument("topology.ramp_end_s: must be > 0");
    if (!(ramp_end_s <= road_length))
      throw std::invalid_argument("topology.ramp_end_s: must not exceed road_length");
  }

  bool has_lane(int id) const noexcept {
    return std::find(lanes.begin(), lanes.end(), id) != lanes.end();
  }

  double lane_center(int lane) const noexcept { return lane * lane_width; }

  /// Lane whose center is nearest to lateral coordinate `y`; ties go to the
  /// lower lane id.
  int attribute_lane(double y) const {
    int best = lanes.front();
    double best_dist = std::numeric_limits<double>::infinity();
    std::vector<int> sorted = lanes;
    std::sort(sorted.begin(), sorted.end());
    for (int lane : sorted) {
      const double dist = std::abs(y - lane_center(lane));
      if (dist < best_dist) {
        best_dist = dist;
        best = lane;
      }
    }
    return best;
  }
};

/// Kinematic state of one vehicle. `s` is the front-bumper position along
/// the road, `d` the lateral offset from the center of `lane`.
struct ActorState {
  ActorId id;
  int lane = kCruisingLane;
  double s = 0.0;
  double d = 0.0;
  double v = 0.0;
  double a = 0.0;
  double length = 4.8;
  double width = 1.9;

  void validate(const LaneTopology& topo) const {
    if (!(v >= 0.0)) throw std::invalid_argument("actor " + id + ": v must be >= 0");
    if (!(length > 0.0)) throw std::invalid_argument("actor " + id + ": length must be > 0");
    if (!(width > 0.0)) throw std::invalid_argument("actor " + id + ": width must be > 0");
    if (!(std::abs(d) <= 1.5 * topo.lane_width))
      throw std::invalid_argument("actor " + id + ": |d| exceeds 1.5 lane widths");
    if (!topo.has_lane(lane)) throw std::invalid_argument("actor " + id + ": unknown lane");
  }
};

/// Gap used by car-following: leader rear bumper to follower front bumper.
inline double bumper_gap(const ActorState& leader, const ActorState& follower) noexcept {
  return leader.s - follower.s - leader.length;
}

/// Gap as used by the DRAC denominator, which subtracts the follower length.
inline double drac_gap(const ActorState& leader, const ActorState& follower) noexcept {
  return leader.s - follower.s - follower.length;
}

/// Actors bound to the negotiation roles around one lag vehicle. `follow0`
/// is the cruising-lane follower of Lag0, needed by MOBIL's politeness term.
struct RoleAssignment {
  std::optional<ActorId> ma;
  std::optional<ActorId> lag0;
  std::optional<ActorId> lead0;
  std::optional<ActorId> lag1;
  std::optional<ActorId> lead1;
  std::optional<ActorId> follow0;

  bool operator==(const RoleAssignment&) const = default;
};

/// Same roles resolved to states; this is what the decision models consume.
struct RoleStates {
  ActorState lag0;
  std::optional<ActorState> ma;
  std::optional<ActorState> lead0;
  std::optional<ActorState> lag1;
  std::optional<ActorState> lead1;
  std::optional<ActorState> follow0;
};

namespace detail {

// Candidate `c` beats `best` when strictly nearer, or equally near with a
// smaller id; this keeps assignment independent of the scene ordering.
inline bool nearer(double dist, const ActorState& c, double best_dist, const ActorState* best) {
  if (best == nullptr) return true;
  if (dist < best_dist) return true;
  return dist == best_dist && c.id < best->id;
}

struct Pick {
  const ActorState* actor = nullptr;
  double dist = std::numeric_limits<double>::infinity();
  void offer(const ActorState& c, double d) {
    if (nearer(d, c, dist, actor)) {
      actor = &c;
      dist = d;
    }
  }
  std::optional<ActorId> id() const {
    return actor ? std::optional<ActorId>(actor->id) : std::nullopt;
  }
};

}  // namespace detail

/// Roles around `ego` without checking that it sits in the cruising lane.
/// Lane membership is taken from `ActorState::lane`.
inline RoleAssignment find_roles(std::span<const ActorState> scene, const LaneTopology& topo,
                                 const ActorState& ego) {
  detail::Pick ma, lead0, lag1, lead1, follow0;
  const double ma_lo = ego.s - kInteractionRadius;
  for (const ActorState& c : scene) {
    if (c.id == ego.id) continue;
    const double ds = c.s - ego.s;
    switch (c.lane) {
      case kRampLane:
        if (c.s >= ma_lo && c.s <= topo.ramp_end_s) ma.offer(c, std::abs(ds));
        break;
      case kCruisingLane:
        if (ds > 0.0) lead0.offer(c, ds);
        else if (ds < 0.0) follow0.offer(c, -ds);
        break;
      case kPassingLane:
        if (ds > 0.0) lead1.offer(c, ds);
        else lag1.offer(c, -ds);
        break;
      default:
        break;
    }
  }
  RoleAssignment r;
  r.lag0 = ego.id;
  r.ma = ma.id();
  r.lead0 = lead0.id();
  r.lag1 = lag1.id();
  r.lead1 = lead1.id();
  r.follow0 = follow0.id();
  return r;
}

inline const ActorState* find_actor(std::span<const ActorState> scene, const ActorId& id) noexcept {
  for (const ActorState& a : scene)
    if (a.id == id) return &a;
  return nullptr;
}

/// Binds MA, Lead0, Lag1, Lead1 (and the cruising-lane follower) around the
/// given lag vehicle. Throws std::invalid_argument if `lag0` is unknown or not
/// in the cruising lane.
inline RoleAssignment assign_roles(std::span<const ActorState> scene, const LaneTopology& topo,
                                   const ActorId& lag0) {
  const ActorState* ego = find_actor(scene, lag0);
  if (ego == nullptr) throw std::invalid_argument("assign_roles: unknown lag0 id '" + lag0 + "'");
  if (ego->lane != kCruisingLane)
    throw std::invalid_argument("assign_roles: lag0 '" + lag0 + "' is not in lane 0");
  return find_roles(scene, topo, *ego);
}

inline RoleStates resolve_roles(std::span<const ActorState> scene, const RoleAssignment& roles) {
  if (!roles.lag0) throw std::invalid_argument("resolve_roles: lag0 missing");
  auto get = [&](const std::optional<ActorId>& id) -> std::optional<ActorState> {
    if (!id) return std::nullopt;
    const ActorState* a = find_actor(scene, *id);
    if (a == nullptr) throw std::invalid_argument("resolve_roles: unknown actor '" + *id + "'");
    return *a;
  };
  RoleStates out{*get(roles.lag0), get(roles.ma), get(roles.lead0),
                 get(roles.lag1), get(roles.lead1), get(roles.follow0)};
  return out;
}

}  // namespace mergesim
