#include <json.hpp>

#include "brx/errors.hpp"
#include "brx/llm.hpp"
#include "llm/assets.hpp"

namespace brx::llm {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::vector<IclExample> load_icl() {
  const auto doc = nlohmann::json::parse(assets::kIclExamples);
  std::vector<IclExample> out;
  for (const auto& e : doc) {
    IclExample ex;
    ex.behavior = policy::parse_behavior(e.at("behavior").get<std::string>());
    ex.role = env::parse_role(e.at("role").get<std::string>());
    ex.features_block = "Features:\n" + join_lines(e.at("features").get<std::vector<std::string>>());
    ex.action_line = e.at("action_line").get<std::string>();
    ex.explanation = e.at("explanation").get<std::string>();
    out.push_back(std::move(ex));
  }
  return out;
}

std::string action_section(Role role, const std::string& line) {
  return "Action taken by the " + std::string(env::to_string(role)) + ":\n" + line;
}

}  // namespace

const std::string& env_description() {
  static const std::string text = assets::kEnvDescription;
  return text;
}

const std::string& br_description() {
  static const std::string text = assets::kBrDescription;
  return text;
}

const std::vector<IclExample>& icl_examples() {
  static const std::vector<IclExample> examples = load_icl();
  return examples;
}

std::string prediction_prompt(Role role) {
  std::string text = assets::kPredictionPrompt;
  const std::string placeholder = "{role}";
  const std::string who(env::to_string(role));
  for (auto pos = text.find(placeholder); pos != std::string::npos; pos = text.find(placeholder, pos)) {
    text.replace(pos, placeholder.size(), who);
    pos += who.size();
  }
  return text;
}

std::string PromptBundle::system_text() const { return env_description + "\n\n" + br_description; }

std::string PromptBundle::user_text() const {
  std::string out;
  for (const auto& ex : icl_examples) {
    out += ex.features_block;
    out += "\n\n" + action_section(ex.role, ex.action_line);
    out += "\n\nExplanation:\n" + ex.explanation;
    out += "\n\n";
  }
  out += query_block;
  return out;
}

std::string PromptBundle::full_text() const { return system_text() + "\n\n" + user_text(); }

PromptBundle build_prompt(const repr::BehaviorRepresentation& br, Role role, RoomCoord from,
                          Action action) {
  PromptBundle b;
  b.env_description = env_description();
  b.br_description = br_description();
  b.icl_examples = icl_examples();

  std::string rendered;
  if (const auto* p = std::get_if<repr::PathBR>(&br)) {
    rendered = repr::render_path(p->path);
  } else if (const auto* s = std::get_if<repr::StatesBR>(&br)) {
    rendered = repr::render_states(*s, role);
  }
  const std::string section = action_section(role, repr::render_action(role, from, action));
  b.query_block = (rendered.empty() ? "" : rendered + "\n\n") + section + "\n\nExplanation:";
  return b;
}

}  // namespace brx::llm
