#pragma once

// Behavior representations: the decision path a tree follows for one state,
// a sample of state-action pairs, or nothing; plus their text rendering in
// the predicate language the prompts use.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "brx/features.hpp"
#include "brx/policies.hpp"
#include "brx/tree.hpp"

namespace brx::repr {

using env::Action;
using env::Observation;
using env::Role;
using env::RoomCoord;

struct PathStep {
  int feature = 0;
  bool branch = false;

  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct DecisionPath {
  std::vector<PathStep> steps;
  Action leaf_action = Action::NoOp;
  Role role = Role::Engineer;

  friend bool operator==(const DecisionPath&, const DecisionPath&) = default;
};

struct StateActionPair {
  int time = 0;
  Observation obs;
  Action action = Action::NoOp;

  friend bool operator==(const StateActionPair&, const StateActionPair&) = default;
};

enum class BrKind : std::uint8_t { Path, States, None };

inline constexpr std::array<BrKind, 3> kAllBrKinds = {BrKind::Path, BrKind::States, BrKind::None};

std::string_view to_string(BrKind k);
// Table label: "BR (Path)", "BR (States)", "No BR".
std::string_view display_name(BrKind k);
BrKind parse_br_kind(std::string_view name);

struct PathBR {
  DecisionPath path;
  friend bool operator==(const PathBR&, const PathBR&) = default;
};

struct StatesBR {
  std::vector<StateActionPair> pairs;  // time-ordered, size k >= 1
  int k = 0;
  friend bool operator==(const StatesBR&, const StatesBR&) = default;
};

struct NoBR {
  friend bool operator==(const NoBR&, const NoBR&) = default;
};

using BehaviorRepresentation = std::variant<PathBR, StatesBR, NoBR>;

BrKind kind_of(const BehaviorRepresentation& br);

// Records (feature, bit) at every internal node on the way to the leaf.
// Throws SchemaMismatchError on a version mismatch.
DecisionPath extract_path(const tree::DecisionTree& tree, const env::FeatureVector& f);

inline constexpr int kDefaultStatesSample = 10;

// k distinct timesteps drawn uniformly from the trajectory, returned in time
// order. Throws EvalError when the trajectory is shorter than k.
StatesBR sample_states_br(const policy::Trajectory& traj, Role role, int k, std::uint64_t seed);

// Predicate grammar, e.g. "room (0, 3) has been explored." or
// "engineer is not in room (1, 1).".
std::string render_predicate(int feature, bool branch);

// Inverse of render_predicate; accepts "(x,y)" as well as "(x, y)".
std::optional<PathStep> parse_predicate(std::string_view line);

// "Features:" then one predicate per line in path order; no trailing newline.
std::string render_path(const DecisionPath& path);

// "engineer moves east to room (1, 2)." and friends. Throws
// IllegalActionError for role/action pairings that can never be legal and
// for moves off the grid.
std::string render_action(Role role, RoomCoord from, Action action);

struct ParsedAction {
  Role role = Role::Engineer;
  Action action = Action::NoOp;
  // Destination for moves, the acting room otherwise.
  RoomCoord room;

  friend bool operator==(const ParsedAction&, const ParsedAction&) = default;
};

// Inverse of render_action (trailing period optional).
std::optional<ParsedAction> parse_action_line(std::string_view line);

// Every explored room's contents, then both agent positions, as predicates.
std::string render_observation(const Observation& obs);

std::string render_states(const StatesBR& br, Role role);

}  // namespace brx::repr
