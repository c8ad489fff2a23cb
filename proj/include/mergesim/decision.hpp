#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mergesim {

/// Lateral choice of the lag vehicle. Also used as the row index of the
/// payoff matrices (0 = keep straight, 1 = change lanes).
enum class Action : int { KeepStraight = 0, ChangeLanes = 1 };

/// Column index of the payoff matrices (the passing-lane follower's choice).
enum class FollowerAction : int { NotYield = 0, Yield = 1 };

/// Which path produced an equilibrium.
enum class SolverPath { LemkeHowson, SupportEnumeration };

struct Decision {
  Action action = Action::KeepStraight;
  double probability_change = 0.0;
  SolverPath solver = SolverPath::LemkeHowson;
};

inline constexpr int index_of(Action a) noexcept { return static_cast<int>(a); }
inline constexpr int index_of(FollowerAction a) noexcept { return static_cast<int>(a); }

inline std::string_view to_string(Action a) noexcept {
  return a == Action::ChangeLanes ? "LC" : "KS";
}

inline std::optional<Action> parse_action(std::string_view s) noexcept {
  if (s == "KS" || s == "KeepStraight" || s == "keep-straight") return Action::KeepStraight;
  if (s == "LC" || s == "ChangeLanes" || s == "lane-change") return Action::ChangeLanes;
  return std::nullopt;
}

inline std::string_view to_string(SolverPath p) noexcept {
  return p == SolverPath::LemkeHowson ? "lemke-howson" : "support-enumeration";
}

}  // namespace mergesim
