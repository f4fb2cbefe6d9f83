#include "brx/io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "brx/errors.hpp"

namespace brx {

std::string canonical_dump(const json& j) {
  // nlohmann::json objects are std::map-backed, so keys are already sorted.
  return j.dump();
}

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

void expect_format(const json& j, std::string_view format, int version) {
  const auto got = required<std::string>(j, "format");
  if (got != format) {
    throw FormatError("expected a '" + std::string(format) + "' document, got '" + got + "'");
  }
  const int v = required<int>(j, "version");
  if (v != version) {
    throw SchemaMismatchError("unsupported " + std::string(format) + " version " +
                              std::to_string(v));
  }
}

template <std::size_t N>
std::array<bool, N> bool_array(const json& j, const char* key) {
  const auto v = required<std::vector<bool>>(j, key);
  if (v.size() != N) {
    throw FormatError(std::string("field '") + key + "' must hold " + std::to_string(N) + " values");
  }
  std::array<bool, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace

}  // namespace brx

namespace brx::env {

void to_json(json& j, const RoomCoord& c) { j = json::array({c.x, c.y}); }

void from_json(const json& j, RoomCoord& c) {
  if (!j.is_array() || j.size() != 2) throw FormatError("room coordinate must be [x, y]");
  c = {j[0].get<int>(), j[1].get<int>()};
  if (!in_bounds(c)) throw FormatError("room coordinate " + to_string(c) + " is off the grid");
}

void to_json(json& j, const GroundTruthRoom& r) {
  j = json{{"rubble", r.has_rubble}, {"victim", to_string(r.victim)}};
}

void from_json(const json& j, GroundTruthRoom& r) {
  r.has_rubble = required<bool>(j, "rubble");
  r.victim = parse_victim_state(required<std::string>(j, "victim"));
}

void to_json(json& j, const WorldState& w) {
  j = json{{"rooms", w.rooms},           {"explored", w.explored}, {"medic_pos", w.medic_pos},
           {"engineer_pos", w.engineer_pos}, {"time", w.time},     {"rng_seed", w.rng_seed}};
}

void from_json(const json& j, WorldState& w) {
  const auto rooms = required<std::vector<GroundTruthRoom>>(j, "rooms");
  if (rooms.size() != static_cast<std::size_t>(kRooms)) throw FormatError("world must list 20 rooms");
  std::copy(rooms.begin(), rooms.end(), w.rooms.begin());
  w.explored = bool_array<kRooms>(j, "explored");
  w.medic_pos = required<RoomCoord>(j, "medic_pos");
  w.engineer_pos = required<RoomCoord>(j, "engineer_pos");
  w.time = required<int>(j, "time");
  w.rng_seed = required<std::uint64_t>(j, "rng_seed");
}

void to_json(json& j, const Observation& o) {
  j = json{{"explored", o.explored},
           {"known_rubble", o.known_rubble},
           {"known_victim", o.known_victim},
           {"medic_pos", o.medic_pos},
           {"engineer_pos", o.engineer_pos}};
}

void from_json(const json& j, Observation& o) {
  o.explored = bool_array<kRooms>(j, "explored");
  o.known_rubble = bool_array<kRooms>(j, "known_rubble");
  o.known_victim = bool_array<kRooms>(j, "known_victim");
  o.medic_pos = required<RoomCoord>(j, "medic_pos");
  o.engineer_pos = required<RoomCoord>(j, "engineer_pos");
  if (!o.consistent()) throw FormatError("observation violates the knowledge invariants");
}

void to_json(json& j, const EnvConfig& c) {
  j = json{{"n_rubble", c.n_rubble},
           {"n_victims", c.n_victims},
           {"hidden_victim_fraction", c.hidden_victim_fraction},
           {"horizon", c.horizon},
           {"seed", c.seed}};
}

void from_json(const json& j, EnvConfig& c) {
  EnvConfig d;
  c.n_rubble = j.value("n_rubble", d.n_rubble);
  c.n_victims = j.value("n_victims", d.n_victims);
  c.hidden_victim_fraction = j.value("hidden_victim_fraction", d.hidden_victim_fraction);
  c.horizon = j.value("horizon", d.horizon);
  c.seed = j.value("seed", d.seed);
}

}  // namespace brx::env

namespace brx::policy {

void to_json(json& j, const Goal& g) {
  j = json{{"kind", to_string(g.kind)}};
  if (g.target) j["target"] = *g.target;
}

void from_json(const json& j, Goal& g) {
  g.kind = parse_goal_kind(required<std::string>(j, "kind"));
  g.target.reset();
  if (j.contains("target")) g.target = j.at("target").get<RoomCoord>();
  const bool needs_target = g.kind != GoalKind::FollowPattern && g.kind != GoalKind::Idle;
  if (needs_target != g.target.has_value()) throw FormatError("goal target presence mismatch");
}

namespace {

json optional_goal(const std::optional<Goal>& g) { return g ? json(*g) : json(nullptr); }

std::optional<Goal> read_goal(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<Goal>();
}

}  // namespace

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  const json header{{"format", "brx.trajectory"},
                    {"version", kTrajectoryFormatVersion},
                    {"config", traj.config},
                    {"engineer_policy", traj.engineer_policy},
                    {"medic_policy", traj.medic_policy},
                    {"steps", traj.steps.size()}};
  out << canonical_dump(header) << '\n';
  for (const auto& s : traj.steps) {
    const json rec{{"time", s.world.time},
                   {"world", s.world},
                   {"observation", s.obs},
                   {"engineer_action", env::to_string(s.engineer_action)},
                   {"medic_action", env::to_string(s.medic_action)},
                   {"engineer_goal", optional_goal(s.engineer_goal)},
                   {"medic_goal", optional_goal(s.medic_goal)}};
    out << canonical_dump(rec) << '\n';
  }
  const json terminal{{"time", traj.final_world.time},
                      {"terminal", true},
                      {"world", traj.final_world},
                      {"observation", env::observe(traj.final_world)}};
  out << canonical_dump(terminal) << '\n';
}

Trajectory read_trajectory(std::istream& in) {
  std::string line;
  auto next = [&]() -> json {
    if (!std::getline(in, line)) throw FormatError("trajectory stream ended early");
    try {
      return json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("malformed trajectory record: ") + e.what());
    }
  };

  const json header = next();
  expect_format(header, "brx.trajectory", kTrajectoryFormatVersion);
  Trajectory traj;
  traj.config = required<env::EnvConfig>(header, "config");
  traj.engineer_policy = required<std::string>(header, "engineer_policy");
  traj.medic_policy = required<std::string>(header, "medic_policy");
  const auto n = required<std::size_t>(header, "steps");

  for (std::size_t t = 0; t < n; ++t) {
    const json rec = next();
    TrajectoryStep s;
    s.world = required<env::WorldState>(rec, "world");
    s.obs = required<env::Observation>(rec, "observation");
    s.engineer_action = env::parse_action(required<std::string>(rec, "engineer_action"));
    s.medic_action = env::parse_action(required<std::string>(rec, "medic_action"));
    s.engineer_goal = read_goal(rec, "engineer_goal");
    s.medic_goal = read_goal(rec, "medic_goal");
    if (s.world.time != static_cast<int>(t)) throw FormatError("trajectory times must run 0, 1, 2, ...");
    traj.steps.push_back(std::move(s));
  }
  const json terminal = next();
  if (!terminal.value("terminal", false)) throw FormatError("trajectory lacks its terminal record");
  traj.final_world = required<env::WorldState>(terminal, "world");
  return traj;
}

std::string trajectory_to_string(const Trajectory& traj) {
  std::ostringstream out;
  write_trajectory(out, traj);
  return out.str();
}

Trajectory trajectory_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_trajectory(in);
}

}  // namespace brx::policy

namespace brx::tree {

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const Node& n = tree.nodes()[i];
    if (n.is_leaf()) {
      nodes.push_back({{"id", i},
                       {"kind", "leaf"},
                       {"action", env::to_string(n.action)},
                       {"class_counts", n.class_counts}});
    } else {
      nodes.push_back({{"id", i},
                       {"kind", "internal"},
                       {"feature", n.feature},
                       {"false_child", n.false_child},
                       {"true_child", n.true_child}});
    }
  }
  return json{{"format", "brx.decision_tree"},
              {"version", kTreeFormatVersion},
              {"role", env::to_string(tree.role())},
              {"feature_schema_version", tree.feature_schema_version()},
              {"max_depth", tree.max_depth()},
              {"root", tree.root()},
              {"nodes", nodes}};
}

DecisionTree tree_from_json(const json& j) {
  expect_format(j, "brx.decision_tree", kTreeFormatVersion);
  const auto& raw = j.at("nodes");
  if (!raw.is_array() || raw.empty()) throw FormatError("tree must list at least one node");
  std::vector<Node> nodes;
  nodes.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const json& r = raw[i];
    if (required<std::size_t>(r, "id") != i) throw FormatError("node ids must equal list positions");
    const auto kind = required<std::string>(r, "kind");
    if (kind == "leaf") {
      const auto counts = required<std::vector<std::uint64_t>>(r, "class_counts");
      if (counts.size() != static_cast<std::size_t>(env::kActionCount)) {
        throw FormatError("leaf class_counts must have 7 entries");
      }
      ClassCounts cc{};
      std::copy(counts.begin(), counts.end(), cc.begin());
      nodes.push_back(Node::leaf(env::parse_action(required<std::string>(r, "action")), cc));
    } else if (kind == "internal") {
      nodes.push_back(Node::internal(required<int>(r, "feature"), required<int>(r, "false_child"),
                                     required<int>(r, "true_child")));
    } else {
      throw FormatError("unknown node kind '" + kind + "'");
    }
  }
  return DecisionTree(std::move(nodes), required<int>(j, "root"),
                      env::parse_role(required<std::string>(j, "role")),
                      required<int>(j, "max_depth"), required<int>(j, "feature_schema_version"));
}

void to_json(json& j, const DistillConfig& c) {
  j = json{{"iterations", c.iterations},
           {"episodes_per_iteration", c.episodes_per_iteration},
           {"max_depth", c.max_depth},
           {"min_samples_leaf", c.min_samples_leaf},
           {"holdout_episodes", c.holdout_episodes},
           {"env", c.env}};
}

void from_json(const json& j, DistillConfig& c) {
  DistillConfig d;
  c.iterations = j.value("iterations", d.iterations);
  c.episodes_per_iteration = j.value("episodes_per_iteration", d.episodes_per_iteration);
  c.max_depth = j.value("max_depth", d.max_depth);
  c.min_samples_leaf = j.value("min_samples_leaf", d.min_samples_leaf);
  c.holdout_episodes = j.value("holdout_episodes", d.holdout_episodes);
  c.env = j.contains("env") ? j.at("env").get<env::EnvConfig>() : d.env;
}

}  // namespace brx::tree
