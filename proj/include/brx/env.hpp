#pragma once

// Two-agent Urban Search-and-Rescue gridworld.
//
// The world is 4 columns by 5 rows. x grows eastward, y grows southward and
// y = 0 is the northernmost row. Both agents share one memory of explored
// rooms; an unexplored room reports no rubble and no victim, and a victim
// under rubble stays invisible until the rubble is removed.

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace brx::env {

inline constexpr int kCols = 4;
inline constexpr int kRows = 5;
inline constexpr int kRooms = kCols * kRows;

struct RoomCoord {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(RoomCoord, RoomCoord) = default;
};

constexpr bool in_bounds(RoomCoord c) {
  return c.x >= 0 && c.x < kCols && c.y >= 0 && c.y < kRows;
}

// Row-major: index = y * kCols + x.
constexpr int room_index(RoomCoord c) { return c.y * kCols + c.x; }
constexpr RoomCoord room_at(int index) { return {index % kCols, index / kCols}; }

constexpr int manhattan(RoomCoord a, RoomCoord b) {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

// "(x, y)"
std::string to_string(RoomCoord c);

enum class VictimState : std::uint8_t { None, Open, HiddenUnderRubble, Rescued };

enum class Action : std::uint8_t {
  MoveNorth,
  MoveSouth,
  MoveEast,
  MoveWest,
  RemoveRubble,
  RescueVictim,
  NoOp,
};
inline constexpr int kActionCount = 7;

inline constexpr std::array<Action, kActionCount> kAllActions = {
    Action::MoveNorth,    Action::MoveSouth,    Action::MoveEast, Action::MoveWest,
    Action::RemoveRubble, Action::RescueVictim, Action::NoOp};

enum class Role : std::uint8_t { Medic, Engineer };

inline constexpr std::array<Role, 2> kRoles = {Role::Medic, Role::Engineer};

std::string_view to_string(Action a);
std::string_view to_string(Role r);
std::string_view to_string(VictimState v);
Action parse_action(std::string_view name);
Role parse_role(std::string_view name);
VictimState parse_victim_state(std::string_view name);

constexpr bool is_move(Action a) {
  return a == Action::MoveNorth || a == Action::MoveSouth || a == Action::MoveEast ||
         a == Action::MoveWest;
}

// Destination of a move; nullopt for non-moves or moves that leave the grid.
std::optional<RoomCoord> destination(RoomCoord from, Action a);

// Small value set over the seven actions.
class ActionSet {
public:
  constexpr ActionSet() = default;

  constexpr void insert(Action a) { mask_ |= bit(a); }
  constexpr bool contains(Action a) const { return (mask_ & bit(a)) != 0; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool empty() const { return mask_ == 0; }
  std::vector<Action> to_vector() const;

  friend constexpr bool operator==(ActionSet, ActionSet) = default;

private:
  static constexpr std::uint8_t bit(Action a) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(a));
  }
  std::uint8_t mask_ = 0;
};

struct GroundTruthRoom {
  bool has_rubble = false;
  VictimState victim = VictimState::None;

  friend bool operator==(const GroundTruthRoom&, const GroundTruthRoom&) = default;
};

struct EnvConfig {
  int n_rubble = 5;
  int n_victims = 4;
  double hidden_victim_fraction = 0.5;
  int horizon = 200;
  std::uint64_t seed = 0;

  int hidden_victims() const;
  int open_victims() const { return n_victims - hidden_victims(); }
  // Throws ConfigError when the placement cannot fit or a field is out of range.
  void validate() const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct WorldState {
  std::array<GroundTruthRoom, kRooms> rooms{};
  std::array<bool, kRooms> explored{};
  RoomCoord medic_pos;
  RoomCoord engineer_pos;
  int time = 0;
  std::uint64_t rng_seed = 0;

  const GroundTruthRoom& room(RoomCoord c) const { return rooms[room_index(c)]; }
  RoomCoord position(Role r) const { return r == Role::Medic ? medic_pos : engineer_pos; }

  int victims_total() const;
  int victims_rescued() const;
  int explored_count() const;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct Observation {
  std::array<bool, kRooms> explored{};
  std::array<bool, kRooms> known_rubble{};
  std::array<bool, kRooms> known_victim{};
  RoomCoord medic_pos;
  RoomCoord engineer_pos;

  RoomCoord position(Role r) const { return r == Role::Medic ? medic_pos : engineer_pos; }
  bool is_explored(RoomCoord c) const { return explored[room_index(c)]; }
  bool has_rubble(RoomCoord c) const { return known_rubble[room_index(c)]; }
  bool has_victim(RoomCoord c) const { return known_victim[room_index(c)]; }
  bool fully_explored() const;

  // True when the knowledge masks respect the shared-memory rules.
  bool consistent() const;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Places rubble and victims uniformly without replacement from the config
// seed. Hidden victims only go under rubble; open victims only in clear rooms.
WorldState new_world(const EnvConfig& config);

// Joint transition. The engineer's action resolves before the medic's; both
// are validated against the pre-step observation.
WorldState step(const WorldState& world, Action engineer_action, Action medic_action);

Observation observe(const WorldState& world);

ActionSet legal_actions(const Observation& obs, Role role);

// All victims rescued or the horizon reached.
bool is_terminal(const WorldState& world, const EnvConfig& config);

}  // namespace brx::env
