#include "brx/repr.hpp"

#include <algorithm>
#include <regex>

#include "brx/errors.hpp"
#include "brx/random.hpp"

namespace brx::repr {

using env::Attribute;

std::string_view to_string(BrKind k) {
  switch (k) {
    case BrKind::Path: return "path";
    case BrKind::States: return "states";
    case BrKind::None: return "none";
  }
  return "?";
}

std::string_view display_name(BrKind k) {
  switch (k) {
    case BrKind::Path: return "BR (Path)";
    case BrKind::States: return "BR (States)";
    case BrKind::None: return "No BR";
  }
  return "?";
}

BrKind parse_br_kind(std::string_view name) {
  for (BrKind k : kAllBrKinds) {
    if (to_string(k) == name) return k;
  }
  throw FormatError("unknown behavior representation '" + std::string(name) + "'");
}

BrKind kind_of(const BehaviorRepresentation& br) {
  return static_cast<BrKind>(br.index());
}

DecisionPath extract_path(const tree::DecisionTree& tree, const env::FeatureVector& f) {
  if (f.schema_version != tree.feature_schema_version()) {
    throw SchemaMismatchError("feature schema does not match the tree");
  }
  DecisionPath path;
  path.role = tree.role();
  const tree::Node* node = &tree.node(tree.root());
  while (!node->is_leaf()) {
    const bool bit = f.test(node->feature);
    path.steps.push_back({node->feature, bit});
    node = &tree.node(bit ? node->true_child : node->false_child);
  }
  path.leaf_action = node->action;
  return path;
}

StatesBR sample_states_br(const policy::Trajectory& traj, Role role, int k, std::uint64_t seed) {
  if (k < 1) throw EvalError("state sample size must be at least 1");
  if (traj.size() < static_cast<std::size_t>(k)) {
    throw EvalError("trajectory has " + std::to_string(traj.size()) + " steps, fewer than k = " +
                    std::to_string(k));
  }
  Rng rng(seed);
  auto picks = sample_without_replacement(rng, static_cast<int>(traj.size()), k);
  std::sort(picks.begin(), picks.end());
  StatesBR br;
  br.k = k;
  for (int t : picks) {
    const auto& s = traj.steps[static_cast<std::size_t>(t)];
    br.pairs.push_back({t, s.obs, s.action(role)});
  }
  return br;
}

std::string render_predicate(int feature, bool branch) {
  const auto d = env::feature_descriptor(feature);
  const std::string room = env::to_string(d.room);
  switch (d.attribute) {
    case Attribute::Explored:
      return "room " + room + (branch ? " has been explored." : " has not been explored.");
    case Attribute::Rubble:
      return "room " + room + (branch ? " contains rubble." : " doesn't contain rubble.");
    case Attribute::Victim:
      return "room " + room + (branch ? " contains a victim." : " doesn't contain a victim.");
    case Attribute::MedicHere:
      return std::string(branch ? "medic is in room " : "medic is not in room ") + room + ".";
    case Attribute::EngineerHere:
      return std::string(branch ? "engineer is in room " : "engineer is not in room ") + room + ".";
  }
  return {};
}

std::optional<PathStep> parse_predicate(std::string_view line) {
  static const std::regex room_form(
      R"(^room \((\d), ?(\d)\) (contains rubble|doesn't contain rubble|contains a victim|doesn't contain a victim|has been explored|has not been explored)\.$)");
  static const std::regex agent_form(R"(^(medic|engineer) is (not )?in room \((\d), ?(\d)\)\.$)");

  const std::string text(line);
  std::smatch m;
  auto coord = [](const std::string& x, const std::string& y) {
    return RoomCoord{std::stoi(x), std::stoi(y)};
  };
  if (std::regex_match(text, m, room_form)) {
    const RoomCoord c = coord(m[1], m[2]);
    if (!env::in_bounds(c)) return std::nullopt;
    const std::string pred = m[3];
    Attribute attr = Attribute::Explored;
    if (pred.find("rubble") != std::string::npos) {
      attr = Attribute::Rubble;
    } else if (pred.find("victim") != std::string::npos) {
      attr = Attribute::Victim;
    }
    const bool negated = pred.find("doesn't") != std::string::npos || pred.find("not") != std::string::npos;
    return PathStep{env::feature_index(c, attr), !negated};
  }
  if (std::regex_match(text, m, agent_form)) {
    const RoomCoord c = coord(m[3], m[4]);
    if (!env::in_bounds(c)) return std::nullopt;
    const Attribute attr = m[1] == "medic" ? Attribute::MedicHere : Attribute::EngineerHere;
    return PathStep{env::feature_index(c, attr), !m[2].matched};
  }
  return std::nullopt;
}

std::string render_path(const DecisionPath& path) {
  std::string out = "Features:";
  for (const auto& s : path.steps) {
    out += '\n';
    out += render_predicate(s.feature, s.branch);
  }
  return out;
}

namespace {

std::string_view direction_word(Action a) {
  switch (a) {
    case Action::MoveNorth: return "north";
    case Action::MoveSouth: return "south";
    case Action::MoveEast: return "east";
    case Action::MoveWest: return "west";
    default: return "";
  }
}

}  // namespace

std::string render_action(Role role, RoomCoord from, Action action) {
  const std::string who(env::to_string(role));
  if (!env::in_bounds(from)) throw IllegalActionError("room " + env::to_string(from) + " is off the grid");
  if (env::is_move(action)) {
    const auto to = env::destination(from, action);
    if (!to) {
      throw IllegalActionError(who + " cannot move " + std::string(direction_word(action)) +
                               " from room " + env::to_string(from));
    }
    return who + " moves " + std::string(direction_word(action)) + " to room " + env::to_string(*to) + ".";
  }
  switch (action) {
    case Action::RemoveRubble:
      if (role != Role::Engineer) throw IllegalActionError("only the engineer removes rubble");
      return "engineer removes rubble in room " + env::to_string(from) + ".";
    case Action::RescueVictim:
      if (role != Role::Medic) throw IllegalActionError("only the medic rescues victims");
      return "medic rescues the victim in room " + env::to_string(from) + ".";
    default:
      return who + " stays in room " + env::to_string(from) + ".";
  }
}

std::optional<ParsedAction> parse_action_line(std::string_view line) {
  static const std::regex form(
      R"(^(medic|engineer) (moves (north|south|east|west) to room|removes rubble in room|rescues the victim in room|stays in room) \((\d), ?(\d)\)\.?$)");
  std::string text(line);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t')) text.pop_back();
  std::smatch m;
  if (!std::regex_match(text, m, form)) return std::nullopt;

  ParsedAction p;
  p.role = env::parse_role(m[1].str());
  p.room = {std::stoi(m[4]), std::stoi(m[5])};
  if (!env::in_bounds(p.room)) return std::nullopt;
  const std::string verb = m[2];
  if (m[3].matched) {
    const std::string dir = m[3];
    p.action = dir == "north"   ? Action::MoveNorth
               : dir == "south" ? Action::MoveSouth
               : dir == "east"  ? Action::MoveEast
                                : Action::MoveWest;
  } else if (verb.starts_with("removes")) {
    if (p.role != Role::Engineer) return std::nullopt;
    p.action = Action::RemoveRubble;
  } else if (verb.starts_with("rescues")) {
    if (p.role != Role::Medic) return std::nullopt;
    p.action = Action::RescueVictim;
  } else {
    p.action = Action::NoOp;
  }
  return p;
}

std::string render_observation(const Observation& obs) {
  std::vector<std::string> lines;
  for (int i = 0; i < env::kRooms; ++i) {
    const RoomCoord c = env::room_at(i);
    if (!obs.is_explored(c)) continue;
    lines.push_back(render_predicate(env::feature_index(c, Attribute::Explored), true));
    if (obs.has_rubble(c)) lines.push_back(render_predicate(env::feature_index(c, Attribute::Rubble), true));
    if (obs.has_victim(c)) lines.push_back(render_predicate(env::feature_index(c, Attribute::Victim), true));
  }
  lines.push_back(render_predicate(env::feature_index(obs.medic_pos, Attribute::MedicHere), true));
  lines.push_back(render_predicate(env::feature_index(obs.engineer_pos, Attribute::EngineerHere), true));

  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string render_states(const StatesBR& br, Role role) {
  std::string out = "State-action samples:";
  const std::string who(env::to_string(role));
  for (std::size_t i = 0; i < br.pairs.size(); ++i) {
    const auto& p = br.pairs[i];
    out += "\n";
    if (i) out += "\n";
    out += "Sample " + std::to_string(i + 1) + " (t=" + std::to_string(p.time) + "):\n";
    out += render_observation(p.obs);
    out += "\nAction taken by the " + who + ":\n";
    out += render_action(role, p.obs.position(role), p.action);
  }
  return out;
}

}  // namespace brx::repr
