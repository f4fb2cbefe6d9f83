#pragma once

// Black-box policy contract, the three scripted reference behaviors, and
// episode rollout.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brx/env.hpp"

namespace brx::policy {

using env::Action;
using env::Observation;
using env::Role;
using env::RoomCoord;

enum class Behavior : std::uint8_t { Explore, Exploit, Fixed };

inline constexpr std::array<Behavior, 3> kAllBehaviors = {Behavior::Explore, Behavior::Exploit,
                                                          Behavior::Fixed};

std::string_view to_string(Behavior b);
Behavior parse_behavior(std::string_view name);

enum class GoalKind : std::uint8_t { ReachRoom, RemoveRubbleAt, RescueVictimAt, FollowPattern, Idle };

std::string_view to_string(GoalKind k);
GoalKind parse_goal_kind(std::string_view name);

struct Goal {
  GoalKind kind = GoalKind::Idle;
  // Present iff kind is not FollowPattern or Idle.
  std::optional<RoomCoord> target;

  static Goal reach(RoomCoord c) { return {GoalKind::ReachRoom, c}; }
  static Goal remove_rubble(RoomCoord c) { return {GoalKind::RemoveRubbleAt, c}; }
  static Goal rescue_victim(RoomCoord c) { return {GoalKind::RescueVictimAt, c}; }
  static Goal follow_pattern() { return {GoalKind::FollowPattern, std::nullopt}; }
  static Goal idle() { return {GoalKind::Idle, std::nullopt}; }

  friend bool operator==(const Goal&, const Goal&) = default;
};

class Policy {
public:
  virtual ~Policy() = default;

  virtual Action act(const Observation& obs, Role role) const = 0;

  // Goal introspection; opaque policies return nullopt.
  virtual std::optional<Goal> current_goal(const Observation& obs, Role role) const {
    (void)obs;
    (void)role;
    return std::nullopt;
  }

  virtual std::string name() const = 0;
};

// First step of a shortest Manhattan path: close the x gap first, then y.
// NoOp when from == to.
Action step_toward(RoomCoord from, RoomCoord to);

// Nearest room satisfying pred by Manhattan distance, ties to smallest (y, x).
template <typename Pred>
std::optional<RoomCoord> nearest_room(RoomCoord from, Pred&& pred) {
  std::optional<RoomCoord> best;
  int best_dist = 0;
  // Row-major scan visits rooms in (y, x) order, so strict < keeps the tie-break.
  for (int i = 0; i < env::kRooms; ++i) {
    const RoomCoord c = env::room_at(i);
    if (!pred(c)) continue;
    const int d = env::manhattan(from, c);
    if (!best || d < best_dist) {
      best = c;
      best_dist = d;
    }
  }
  return best;
}

// Successor room of the sweep cycle: down column 0, up column 1 to row 1,
// down column 2 from row 1, up column 3, then west along row 0 back to (0, 0).
RoomCoord sweep_successor(RoomCoord c);

struct Decision {
  Action action = Action::NoOp;
  Goal goal;
};

Decision explore_decide(const Observation& obs, Role role);
Decision exploit_decide(const Observation& obs, Role role);
Decision fixed_decide(const Observation& obs, Role role);

inline Action explore_act(const Observation& obs, Role role) { return explore_decide(obs, role).action; }
inline Action exploit_act(const Observation& obs, Role role) { return exploit_decide(obs, role).action; }
inline Action fixed_act(const Observation& obs, Role role) { return fixed_decide(obs, role).action; }

class ScriptedPolicy final : public Policy {
public:
  explicit ScriptedPolicy(Behavior behavior) : behavior_(behavior) {}

  Action act(const Observation& obs, Role role) const override;
  std::optional<Goal> current_goal(const Observation& obs, Role role) const override;
  std::string name() const override { return std::string(to_string(behavior_)); }
  Behavior behavior() const { return behavior_; }

private:
  Behavior behavior_;
};

std::shared_ptr<const Policy> make_policy(Behavior behavior);

struct TrajectoryStep {
  env::WorldState world;
  Observation obs;
  Action engineer_action = Action::NoOp;
  Action medic_action = Action::NoOp;
  std::optional<Goal> engineer_goal;
  std::optional<Goal> medic_goal;

  Action action(Role r) const { return r == Role::Medic ? medic_action : engineer_action; }
  const std::optional<Goal>& goal(Role r) const {
    return r == Role::Medic ? medic_goal : engineer_goal;
  }

  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct Trajectory {
  env::EnvConfig config;
  std::string engineer_policy;
  std::string medic_policy;
  std::vector<TrajectoryStep> steps;
  // State after the last recorded step.
  env::WorldState final_world;

  std::size_t size() const { return steps.size(); }
  // Observation at time t; t == size() yields the terminal observation.
  Observation observation_at(std::size_t t) const;
  const std::string& policy_name(Role r) const {
    return r == Role::Medic ? medic_policy : engineer_policy;
  }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// new_world + step until terminal. Illegal policy output propagates as
// IllegalActionError / RoleViolationError.
Trajectory rollout(const Policy& engineer_policy, const Policy& medic_policy,
                   const env::EnvConfig& config);

}  // namespace brx::policy
