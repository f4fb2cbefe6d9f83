#include "brx/errors.hpp"
#include "brx/llm_io.hpp"

namespace brx::repr {

void to_json(json& j, const BehaviorRepresentation& br) {
  j = json{{"kind", to_string(kind_of(br))}};
  if (const auto* p = std::get_if<PathBR>(&br)) {
    json steps = json::array();
    for (const auto& s : p->path.steps) {
      steps.push_back({{"feature", s.feature}, {"branch", s.branch}, {"text", render_predicate(s.feature, s.branch)}});
    }
    j["role"] = env::to_string(p->path.role);
    j["leaf_action"] = env::to_string(p->path.leaf_action);
    j["steps"] = steps;
  } else if (const auto* s = std::get_if<StatesBR>(&br)) {
    json pairs = json::array();
    for (const auto& pair : s->pairs) {
      pairs.push_back({{"time", pair.time}, {"observation", pair.obs}, {"action", env::to_string(pair.action)}});
    }
    j["k"] = s->k;
    j["pairs"] = pairs;
  }
}

void from_json(const json& j, BehaviorRepresentation& br) {
  try {
    switch (parse_br_kind(j.at("kind").get<std::string>())) {
      case BrKind::Path: {
        PathBR p;
        p.path.role = env::parse_role(j.at("role").get<std::string>());
        p.path.leaf_action = env::parse_action(j.at("leaf_action").get<std::string>());
        for (const auto& s : j.at("steps")) {
          p.path.steps.push_back({s.at("feature").get<int>(), s.at("branch").get<bool>()});
        }
        br = p;
        return;
      }
      case BrKind::States: {
        StatesBR s;
        s.k = j.at("k").get<int>();
        for (const auto& pair : j.at("pairs")) {
          s.pairs.push_back({pair.at("time").get<int>(), pair.at("observation").get<Observation>(),
                             env::parse_action(pair.at("action").get<std::string>())});
        }
        br = s;
        return;
      }
      case BrKind::None:
        br = NoBR{};
        return;
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed behavior representation: ") + e.what());
  }
}

void to_json(json& j, const ParsedAction& p) {
  j = json{{"role", env::to_string(p.role)}, {"action", env::to_string(p.action)}, {"room", p.room}};
}

void from_json(const json& j, ParsedAction& p) {
  p.role = env::parse_role(j.at("role").get<std::string>());
  p.action = env::parse_action(j.at("action").get<std::string>());
  p.room = j.at("room").get<RoomCoord>();
}

}  // namespace brx::repr

namespace brx::llm {

void to_json(json& j, const Message& m) { j = json{{"sender", to_string(m.sender)}, {"text", m.text}}; }

void from_json(const json& j, Message& m) {
  m.sender = parse_sender(j.at("sender").get<std::string>());
  m.text = j.at("text").get<std::string>();
}

void to_json(json& j, const ChatSession& s) {
  j = json{{"state_ref", s.state_ref()}, {"created_at", s.created_at()}, {"messages", s.messages()}};
}

void from_json(const json& j, ChatSession& s) {
  s = ChatSession::restore(j.at("state_ref").get<std::string>(), j.at("created_at").get<std::string>(),
                           j.at("messages").get<std::vector<Message>>());
}

void to_json(json& j, const PromptBundle& b) {
  json icl = json::array();
  for (const auto& ex : b.icl_examples) {
    icl.push_back({{"behavior", policy::to_string(ex.behavior)},
                   {"role", env::to_string(ex.role)},
                   {"features_block", ex.features_block},
                   {"action_line", ex.action_line},
                   {"explanation", ex.explanation}});
  }
  j = json{{"env_description", b.env_description},
           {"br_description", b.br_description},
           {"icl_examples", icl},
           {"query_block", b.query_block}};
}

void from_json(const json& j, PromptBundle& b) {
  b.env_description = j.at("env_description").get<std::string>();
  b.br_description = j.at("br_description").get<std::string>();
  b.query_block = j.at("query_block").get<std::string>();
  b.icl_examples.clear();
  for (const auto& e : j.at("icl_examples")) {
    b.icl_examples.push_back({policy::parse_behavior(e.at("behavior").get<std::string>()),
                              env::parse_role(e.at("role").get<std::string>()),
                              e.at("features_block").get<std::string>(), e.at("action_line").get<std::string>(),
                              e.at("explanation").get<std::string>()});
  }
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

json record_to_json(const ExplanationRecord& r) {
  json j{{"format", "brx.explanation"},
         {"version", kExplanationFormatVersion},
         {"id", r.id},
         {"trajectory_id", r.trajectory_id},
         {"t", r.t},
         {"behavior", policy::to_string(r.behavior)},
         {"role", env::to_string(r.role)},
         {"br_kind", repr::to_string(r.br_kind)},
         {"state_category", r.state_category ? json(to_string(*r.state_category)) : json(nullptr)},
         {"observation", r.observation},
         {"action", env::to_string(r.action)},
         {"action_text", repr::render_action(r.role, r.observation.position(r.role), r.action)},
         {"tree_action", env::to_string(r.tree_action)},
         {"br", r.br},
         {"prompt", r.prompt},
         {"prompt_text", r.prompt_text},
         {"explanation_text", opt(r.explanation_text)},
         {"prediction_text", opt(r.prediction_text)},
         {"predicted_action", opt(r.predicted_action)},
         {"prediction_parseable", r.predicted_action.has_value()},
         {"session", r.session},
         {"gated", r.gated},
         {"live", r.live},
         {"model", r.model}};
  return j;
}

ExplanationRecord record_from_json(const json& j) {
  try {
    if (j.at("format") != "brx.explanation") throw FormatError("not an explanation record");
    if (j.at("version") != kExplanationFormatVersion) {
      throw SchemaMismatchError("unsupported explanation record version");
    }
    ExplanationRecord r;
    r.id = j.at("id").get<std::string>();
    r.trajectory_id = j.at("trajectory_id").get<std::string>();
    r.t = j.at("t").get<int>();
    r.behavior = policy::parse_behavior(j.at("behavior").get<std::string>());
    r.role = env::parse_role(j.at("role").get<std::string>());
    r.br_kind = repr::parse_br_kind(j.at("br_kind").get<std::string>());
    if (auto c = read_opt<std::string>(j, "state_category")) r.state_category = parse_category(*c);
    r.observation = j.at("observation").get<env::Observation>();
    r.action = env::parse_action(j.at("action").get<std::string>());
    r.tree_action = env::parse_action(j.at("tree_action").get<std::string>());
    r.br = j.at("br").get<repr::BehaviorRepresentation>();
    r.prompt = j.at("prompt").get<PromptBundle>();
    r.prompt_text = j.at("prompt_text").get<std::string>();
    r.explanation_text = read_opt<std::string>(j, "explanation_text");
    r.prediction_text = read_opt<std::string>(j, "prediction_text");
    r.predicted_action = read_opt<repr::ParsedAction>(j, "predicted_action");
    r.session = j.at("session").get<ChatSession>();
    r.gated = j.at("gated").get<bool>();
    r.live = j.at("live").get<bool>();
    r.model = j.value("model", "");
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed explanation record: ") + e.what());
  }
}

}  // namespace brx::llm
