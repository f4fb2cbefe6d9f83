#include "brx/env.hpp"

#include <algorithm>
#include <cmath>

#include "brx/errors.hpp"
#include "brx/random.hpp"

namespace brx::env {

std::string to_string(RoomCoord c) {
  return "(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
}

namespace {

constexpr std::array<std::string_view, kActionCount> kActionNames = {
    "move_north", "move_south", "move_east", "move_west", "remove_rubble", "rescue_victim", "noop"};

constexpr std::array<std::string_view, 4> kVictimNames = {"none", "open", "hidden", "rescued"};

}  // namespace

std::string_view to_string(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::string_view to_string(Role r) { return r == Role::Medic ? "medic" : "engineer"; }

std::string_view to_string(VictimState v) { return kVictimNames[static_cast<std::size_t>(v)]; }

Action parse_action(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) {
      return static_cast<Action>(i);
    }
  }
  throw FormatError("unknown action '" + std::string(name) + "'");
}

Role parse_role(std::string_view name) {
  if (name == "medic") return Role::Medic;
  if (name == "engineer") return Role::Engineer;
  throw FormatError("unknown role '" + std::string(name) + "'");
}

VictimState parse_victim_state(std::string_view name) {
  for (std::size_t i = 0; i < kVictimNames.size(); ++i) {
    if (kVictimNames[i] == name) {
      return static_cast<VictimState>(i);
    }
  }
  throw FormatError("unknown victim state '" + std::string(name) + "'");
}

std::optional<RoomCoord> destination(RoomCoord from, Action a) {
  RoomCoord to = from;
  switch (a) {
    case Action::MoveNorth: --to.y; break;
    case Action::MoveSouth: ++to.y; break;
    case Action::MoveEast: ++to.x; break;
    case Action::MoveWest: --to.x; break;
    default: return std::nullopt;
  }
  if (!in_bounds(to)) {
    return std::nullopt;
  }
  return to;
}

std::vector<Action> ActionSet::to_vector() const {
  std::vector<Action> out;
  for (Action a : kAllActions) {
    if (contains(a)) out.push_back(a);
  }
  return out;
}

int EnvConfig::hidden_victims() const {
  return static_cast<int>(std::lround(hidden_victim_fraction * n_victims));
}

void EnvConfig::validate() const {
  if (n_rubble < 0 || n_victims < 0) {
    throw ConfigError("entity counts must be non-negative");
  }
  if (!(hidden_victim_fraction >= 0.0 && hidden_victim_fraction <= 1.0)) {
    throw ConfigError("hidden_victim_fraction must lie in [0, 1]");
  }
  if (horizon < 1) {
    throw ConfigError("horizon must be at least 1");
  }
  if (n_rubble > kRooms) {
    throw ConfigError("n_rubble = " + std::to_string(n_rubble) + " exceeds the " +
                      std::to_string(kRooms) + " rooms");
  }
  if (hidden_victims() > n_rubble) {
    throw ConfigError("more hidden victims than rubble rooms");
  }
  if (n_rubble + open_victims() > kRooms) {
    throw ConfigError("rubble and open victims do not fit in " + std::to_string(kRooms) +
                      " rooms");
  }
}

int WorldState::victims_total() const {
  return static_cast<int>(std::count_if(rooms.begin(), rooms.end(), [](const GroundTruthRoom& r) {
    return r.victim != VictimState::None;
  }));
}

int WorldState::victims_rescued() const {
  return static_cast<int>(std::count_if(rooms.begin(), rooms.end(), [](const GroundTruthRoom& r) {
    return r.victim == VictimState::Rescued;
  }));
}

int WorldState::explored_count() const {
  return static_cast<int>(std::count(explored.begin(), explored.end(), true));
}

bool Observation::fully_explored() const {
  return std::all_of(explored.begin(), explored.end(), [](bool e) { return e; });
}

bool Observation::consistent() const {
  if (!in_bounds(medic_pos) || !in_bounds(engineer_pos)) return false;
  if (!is_explored(medic_pos) || !is_explored(engineer_pos)) return false;
  for (int i = 0; i < kRooms; ++i) {
    if ((known_rubble[i] || known_victim[i]) && !explored[i]) return false;
    if (known_rubble[i] && known_victim[i]) return false;
  }
  return true;
}

WorldState new_world(const EnvConfig& config) {
  config.validate();
  Rng rng(config.seed);
  WorldState world;
  world.rng_seed = config.seed;

  const auto rubble_rooms = sample_without_replacement(rng, kRooms, config.n_rubble);
  for (int r : rubble_rooms) {
    world.rooms[static_cast<std::size_t>(r)].has_rubble = true;
  }

  // Hidden victims go under the first rubble rooms drawn (a uniform subset).
  const int hidden = config.hidden_victims();
  for (int i = 0; i < hidden; ++i) {
    world.rooms[static_cast<std::size_t>(rubble_rooms[static_cast<std::size_t>(i)])].victim =
        VictimState::HiddenUnderRubble;
  }

  std::vector<int> clear_rooms;
  for (int i = 0; i < kRooms; ++i) {
    if (!world.rooms[static_cast<std::size_t>(i)].has_rubble) clear_rooms.push_back(i);
  }
  const auto open_picks =
      sample_without_replacement(rng, static_cast<int>(clear_rooms.size()), config.open_victims());
  for (int p : open_picks) {
    world.rooms[static_cast<std::size_t>(clear_rooms[static_cast<std::size_t>(p)])].victim =
        VictimState::Open;
  }

  const auto starts = sample_without_replacement(rng, kRooms, 2);
  world.engineer_pos = room_at(starts[0]);
  world.medic_pos = room_at(starts[1]);
  world.explored[static_cast<std::size_t>(starts[0])] = true;
  world.explored[static_cast<std::size_t>(starts[1])] = true;
  return world;
}

Observation observe(const WorldState& world) {
  Observation obs;
  obs.explored = world.explored;
  for (int i = 0; i < kRooms; ++i) {
    const auto& room = world.rooms[static_cast<std::size_t>(i)];
    if (!world.explored[static_cast<std::size_t>(i)]) continue;
    obs.known_rubble[static_cast<std::size_t>(i)] = room.has_rubble;
    obs.known_victim[static_cast<std::size_t>(i)] = room.victim == VictimState::Open;
  }
  obs.medic_pos = world.medic_pos;
  obs.engineer_pos = world.engineer_pos;
  return obs;
}

ActionSet legal_actions(const Observation& obs, Role role) {
  ActionSet legal;
  const RoomCoord here = obs.position(role);
  for (Action a : {Action::MoveNorth, Action::MoveSouth, Action::MoveEast, Action::MoveWest}) {
    if (destination(here, a)) legal.insert(a);
  }
  if (role == Role::Engineer && obs.has_rubble(here)) legal.insert(Action::RemoveRubble);
  if (role == Role::Medic && obs.has_victim(here)) legal.insert(Action::RescueVictim);
  legal.insert(Action::NoOp);
  return legal;
}

namespace {

void check_legal(const Observation& obs, Role role, Action action) {
  if ((action == Action::RemoveRubble && role != Role::Engineer) ||
      (action == Action::RescueVictim && role != Role::Medic)) {
    throw RoleViolationError(std::string(to_string(role)) + " cannot perform " +
                             std::string(to_string(action)));
  }
  if (!legal_actions(obs, role).contains(action)) {
    throw IllegalActionError(std::string(to_string(role)) + " cannot perform " +
                             std::string(to_string(action)) + " in room " +
                             to_string(obs.position(role)));
  }
}

void apply(WorldState& world, Role role, Action action) {
  RoomCoord& pos = role == Role::Medic ? world.medic_pos : world.engineer_pos;
  auto& room = world.rooms[static_cast<std::size_t>(room_index(pos))];
  if (is_move(action)) {
    pos = *destination(pos, action);
    world.explored[static_cast<std::size_t>(room_index(pos))] = true;
  } else if (action == Action::RemoveRubble) {
    room.has_rubble = false;
    if (room.victim == VictimState::HiddenUnderRubble) room.victim = VictimState::Open;
  } else if (action == Action::RescueVictim) {
    room.victim = VictimState::Rescued;
  }
}

}  // namespace

WorldState step(const WorldState& world, Action engineer_action, Action medic_action) {
  const Observation obs = observe(world);
  check_legal(obs, Role::Engineer, engineer_action);
  check_legal(obs, Role::Medic, medic_action);
  WorldState next = world;
  apply(next, Role::Engineer, engineer_action);
  apply(next, Role::Medic, medic_action);
  ++next.time;
  return next;
}

bool is_terminal(const WorldState& world, const EnvConfig& config) {
  return world.time >= config.horizon || world.victims_rescued() == world.victims_total();
}

}  // namespace brx::env
