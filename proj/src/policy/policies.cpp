#include "brx/policies.hpp"

#include "brx/errors.hpp"

namespace brx::policy {

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::Explore: return "explore";
    case Behavior::Exploit: return "exploit";
    case Behavior::Fixed: return "fixed";
  }
  return "?";
}

Behavior parse_behavior(std::string_view name) {
  for (Behavior b : kAllBehaviors) {
    if (to_string(b) == name) return b;
  }
  throw FormatError("unknown behavior '" + std::string(name) + "'");
}

namespace {
constexpr std::array<std::string_view, 5> kGoalNames = {"reach_room", "remove_rubble_at",
                                                        "rescue_victim_at", "follow_pattern", "idle"};
}

std::string_view to_string(GoalKind k) { return kGoalNames[static_cast<std::size_t>(k)]; }

GoalKind parse_goal_kind(std::string_view name) {
  for (std::size_t i = 0; i < kGoalNames.size(); ++i) {
    if (kGoalNames[i] == name) return static_cast<GoalKind>(i);
  }
  throw FormatError("unknown goal kind '" + std::string(name) + "'");
}

Action step_toward(RoomCoord from, RoomCoord to) {
  if (to.x > from.x) return Action::MoveEast;
  if (to.x < from.x) return Action::MoveWest;
  if (to.y > from.y) return Action::MoveSouth;
  if (to.y < from.y) return Action::MoveNorth;
  return Action::NoOp;
}

RoomCoord sweep_successor(RoomCoord c) {
  switch (c.x) {
    case 0:
      return c.y < env::kRows - 1 ? RoomCoord{0, c.y + 1} : RoomCoord{1, c.y};
    case 1:
      if (c.y == 0) return {0, 0};
      return c.y > 1 ? RoomCoord{1, c.y - 1} : RoomCoord{2, 1};
    case 2:
      if (c.y == 0) return {1, 0};
      return c.y < env::kRows - 1 ? RoomCoord{2, c.y + 1} : RoomCoord{3, c.y};
    default:
      return c.y > 0 ? RoomCoord{3, c.y - 1} : RoomCoord{2, 0};
  }
}

namespace {

std::optional<RoomCoord> nearest_unexplored(const Observation& obs, RoomCoord here) {
  return nearest_room(here, [&](RoomCoord c) { return !obs.is_explored(c); });
}

// Head for (or act on) the nearest known rubble / victim for the role.
std::optional<Decision> handle_entities(const Observation& obs, Role role) {
  const RoomCoord here = obs.position(role);
  if (role == Role::Engineer) {
    auto target = nearest_room(here, [&](RoomCoord c) { return obs.has_rubble(c); });
    if (!target) return std::nullopt;
    const Action a = *target == here ? Action::RemoveRubble : step_toward(here, *target);
    return Decision{a, Goal::remove_rubble(*target)};
  }
  auto target = nearest_room(here, [&](RoomCoord c) { return obs.has_victim(c); });
  if (!target) return std::nullopt;
  const Action a = *target == here ? Action::RescueVictim : step_toward(here, *target);
  return Decision{a, Goal::rescue_victim(*target)};
}

std::optional<Decision> explore_step(const Observation& obs, Role role) {
  const RoomCoord here = obs.position(role);
  auto target = nearest_unexplored(obs, here);
  if (!target) return std::nullopt;
  return Decision{step_toward(here, *target), Goal::reach(*target)};
}

}  // namespace

Decision explore_decide(const Observation& obs, Role role) {
  if (auto d = explore_step(obs, role)) return *d;
  if (auto d = handle_entities(obs, role)) return *d;
  return {Action::NoOp, Goal::idle()};
}

Decision exploit_decide(const Observation& obs, Role role) {
  if (auto d = handle_entities(obs, role)) return *d;
  if (auto d = explore_step(obs, role)) return *d;
  return {Action::NoOp, Goal::idle()};
}

Decision fixed_decide(const Observation& obs, Role role) {
  const RoomCoord here = obs.position(role);
  return {step_toward(here, sweep_successor(here)), Goal::follow_pattern()};
}

namespace {

Decision decide(Behavior b, const Observation& obs, Role role) {
  switch (b) {
    case Behavior::Explore: return explore_decide(obs, role);
    case Behavior::Exploit: return exploit_decide(obs, role);
    case Behavior::Fixed: return fixed_decide(obs, role);
  }
  return {};
}

}  // namespace

Action ScriptedPolicy::act(const Observation& obs, Role role) const {
  return decide(behavior_, obs, role).action;
}

std::optional<Goal> ScriptedPolicy::current_goal(const Observation& obs, Role role) const {
  return decide(behavior_, obs, role).goal;
}

std::shared_ptr<const Policy> make_policy(Behavior behavior) {
  return std::make_shared<ScriptedPolicy>(behavior);
}

Observation Trajectory::observation_at(std::size_t t) const {
  if (t < steps.size()) return steps[t].obs;
  if (t == steps.size()) return env::observe(final_world);
  throw std::out_of_range("timestep " + std::to_string(t) + " beyond trajectory of length " +
                          std::to_string(steps.size()));
}

Trajectory rollout(const Policy& engineer_policy, const Policy& medic_policy,
                   const env::EnvConfig& config) {
  Trajectory traj;
  traj.config = config;
  traj.engineer_policy = engineer_policy.name();
  traj.medic_policy = medic_policy.name();

  env::WorldState world = env::new_world(config);
  while (!env::is_terminal(world, config)) {
    TrajectoryStep s;
    s.world = world;
    s.obs = env::observe(world);
    s.engineer_action = engineer_policy.act(s.obs, Role::Engineer);
    s.medic_action = medic_policy.act(s.obs, Role::Medic);
    s.engineer_goal = engineer_policy.current_goal(s.obs, Role::Engineer);
    s.medic_goal = medic_policy.current_goal(s.obs, Role::Medic);
    world = env::step(world, s.engineer_action, s.medic_action);
    traj.steps.push_back(std::move(s));
  }
  traj.final_world = world;
  return traj;
}

}  // namespace brx::policy
