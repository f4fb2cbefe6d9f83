#include "brx/category.hpp"

#include <string>

#include "brx/errors.hpp"
#include "brx/eval.hpp"

namespace brx {

std::string_view to_string(StateCategory c) {
  switch (c) {
    case StateCategory::LongTerm: return "long_term";
    case StateCategory::ShortTerm: return "short_term";
    case StateCategory::Ambiguous: return "ambiguous";
  }
  return "?";
}

std::string_view display_name(StateCategory c) {
  switch (c) {
    case StateCategory::LongTerm: return "Long-term";
    case StateCategory::ShortTerm: return "Short-term";
    case StateCategory::Ambiguous: return "Ambiguous";
  }
  return "?";
}

StateCategory parse_category(std::string_view name) {
  for (StateCategory c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  throw FormatError("unknown state category '" + std::string(name) + "'");
}

}  // namespace brx

namespace brx::eval {

using policy::GoalKind;

bool is_ambiguous(const env::Observation& obs, const env::Observation& next_obs, Role role) {
  return policy::explore_act(obs, role) == policy::exploit_act(obs, role) &&
         policy::explore_act(next_obs, role) != policy::exploit_act(next_obs, role);
}

env::Observation next_observation_on_common_action(const policy::Trajectory& traj, int t, Role role) {
  const auto& s = traj.steps.at(static_cast<std::size_t>(t));
  const Action common = policy::explore_act(s.obs, role);
  const Action eng = role == Role::Engineer ? common : s.engineer_action;
  const Action med = role == Role::Medic ? common : s.medic_action;
  return env::observe(env::step(s.world, eng, med));
}

bool achieves_goal(const policy::Goal& goal, env::RoomCoord from, Action action) {
  if (!goal.target) return false;
  const env::RoomCoord target = *goal.target;
  if (env::is_move(action)) {
    const auto to = env::destination(from, action);
    return to && *to == target;
  }
  switch (goal.kind) {
    case GoalKind::RemoveRubbleAt: return action == Action::RemoveRubble && from == target;
    case GoalKind::RescueVictimAt: return action == Action::RescueVictim && from == target;
    default: return false;
  }
}

StateCategory categorize_state(const policy::Trajectory& traj, int t, Role role) {
  if (t < 0 || static_cast<std::size_t>(t) >= traj.size()) {
    throw EvalError("timestep " + std::to_string(t) + " has no successor in the trajectory");
  }
  const auto& s = traj.steps[static_cast<std::size_t>(t)];
  if (policy::explore_act(s.obs, role) == policy::exploit_act(s.obs, role) &&
      is_ambiguous(s.obs, next_observation_on_common_action(traj, t, role), role)) {
    return StateCategory::Ambiguous;
  }
  const auto& goal = s.goal(role);
  if (!goal) throw EvalError("trajectory records no goal for the " + std::string(env::to_string(role)));
  if (!goal->target) {
    throw EvalError("goal '" + std::string(policy::to_string(goal->kind)) + "' has no target room");
  }
  return achieves_goal(*goal, s.obs.position(role), s.action(role)) ? StateCategory::ShortTerm
                                                                    : StateCategory::LongTerm;
}

}  // namespace brx::eval
