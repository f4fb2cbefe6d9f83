#pragma once

// Prompt assembly, chat sessions and chat-completion backends.

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brx/category.hpp"
#include "brx/policies.hpp"
#include "brx/repr.hpp"

namespace brx::llm {

using env::Action;
using env::Role;
using env::RoomCoord;

// Frozen prompt assets, compiled in from assets/prompts.
struct IclExample {
  policy::Behavior behavior = policy::Behavior::Explore;
  Role role = Role::Engineer;
  std::string features_block;  // "Features:\n..." without trailing newline
  std::string action_line;
  std::string explanation;
};

const std::string& env_description();
const std::string& br_description();
const std::vector<IclExample>& icl_examples();
// Follow-up question asking for the next action in "ANSWER: ..." form.
std::string prediction_prompt(Role role);

struct PromptBundle {
  std::string env_description;
  std::string br_description;
  std::vector<IclExample> icl_examples;
  std::string query_block;

  // System message: environment description, blank line, BR description.
  std::string system_text() const;
  // User message: every ICL example, then the query block.
  std::string user_text() const;
  // system_text + blank line + user_text; stored verbatim for audit.
  std::string full_text() const;

  friend bool operator==(const PromptBundle& a, const PromptBundle& b) {
    return a.full_text() == b.full_text();
  }
};

// Query block: the rendered representation (nothing for NoBR), the
// "Action taken by the <role>:" section and a closing "Explanation:" cue.
PromptBundle build_prompt(const repr::BehaviorRepresentation& br, Role role, RoomCoord from,
                          Action action);

enum class Sender : std::uint8_t { System, User, Assistant };

std::string_view to_string(Sender s);
Sender parse_sender(std::string_view name);

struct Message {
  Sender sender = Sender::User;
  std::string text;

  friend bool operator==(const Message&, const Message&) = default;
};

// Append-only history: one System message, then strict User/Assistant turns.
class ChatSession {
public:
  ChatSession() = default;
  ChatSession(std::string state_ref, std::string created_at)
      : state_ref_(std::move(state_ref)), created_at_(std::move(created_at)) {}

  // Rebuilds a session from storage, validating the alternation.
  static ChatSession restore(std::string state_ref, std::string created_at,
                             std::vector<Message> messages);

  const std::vector<Message>& messages() const { return messages_; }
  const std::string& state_ref() const { return state_ref_; }
  const std::string& created_at() const { return created_at_; }
  bool initialized() const { return !messages_.empty(); }
  std::size_t size() const { return messages_.size(); }

  void set_system(std::string text);
  // User and assistant messages only ever enter as a completed pair.
  void append_turn(std::string user_text, std::string assistant_text);

  friend bool operator==(const ChatSession&, const ChatSession&) = default;

private:
  std::string state_ref_;
  std::string created_at_;
  std::vector<Message> messages_;
};

struct BackendMetadata {
  std::string model;
  double temperature = 0.0;
};

class LlmBackend {
public:
  virtual ~LlmBackend() = default;
  // Assistant reply to the full history. Failures raise BackendError.
  virtual std::string complete(const std::vector<Message>& messages) = 0;
  virtual BackendMetadata metadata() const = 0;
};

// Offline backend. A scripted reply is chosen by the hash of the last user
// message; otherwise the reply repeats the most recent action line found in
// the conversation as "ANSWER: <line>".
class MockBackend final : public LlmBackend {
public:
  explicit MockBackend(const std::map<std::string, std::string>& script = {});

  std::string complete(const std::vector<Message>& messages) override;
  BackendMetadata metadata() const override { return {"mock", 0.0}; }

  static std::uint64_t key_hash(std::string_view text);

private:
  std::map<std::uint64_t, std::string> script_;
};

struct HttpChatConfig {
  std::string endpoint;  // full URL of the chat-completions resource
  std::string api_key;
  std::string model = "gpt-4";
  double temperature = 0.0;
  int max_attempts = 2;  // one retry
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{60};

  // BRX_LLM_ENDPOINT (required), BRX_LLM_API_KEY, BRX_LLM_MODEL,
  // BRX_LLM_TEMPERATURE. nullopt when no endpoint is configured.
  static std::optional<HttpChatConfig> from_env();
};

// Chat-completions over HTTP(S): POSTs {model, temperature, messages} and
// reads choices[0].message.content. Connection failures, 429 and 5xx are
// retried with exponential backoff; other statuses fail immediately.
class HttpChatBackend final : public LlmBackend {
public:
  explicit HttpChatBackend(HttpChatConfig config);

  std::string complete(const std::vector<Message>& messages) override;
  BackendMetadata metadata() const override { return {config_.model, config_.temperature}; }

private:
  HttpChatConfig config_;
};

struct ExplanationRecord {
  std::string id;
  std::string trajectory_id;
  int t = 0;
  policy::Behavior behavior = policy::Behavior::Explore;
  Role role = Role::Engineer;
  repr::BrKind br_kind = repr::BrKind::Path;
  std::optional<StateCategory> state_category;
  env::Observation observation;
  Action action = Action::NoOp;       // expert action at this state
  Action tree_action = Action::NoOp;  // surrogate action at this state
  repr::BehaviorRepresentation br = repr::NoBR{};
  PromptBundle prompt;
  std::string prompt_text;
  std::optional<std::string> explanation_text;
  std::optional<std::string> prediction_text;
  std::optional<repr::ParsedAction> predicted_action;  // unset when unparseable
  ChatSession session;
  bool gated = false;
  bool live = false;
  std::string model;
};

// Sends the system message and the ICL + query user message; stores the
// reply as the explanation. GatingError when the record is not gated.
ExplanationRecord& request_explanation(ExplanationRecord& record, LlmBackend& backend);

// Follow-up asking for the next action; the reply's "ANSWER:" line is parsed
// into predicted_action when it follows the action grammar.
ExplanationRecord& request_action_prediction(ExplanationRecord& record, LlmBackend& backend);

// Free-form follow-up turn; the whole history is resent.
std::string follow_up(ExplanationRecord& record, const std::string& user_text, LlmBackend& backend);

// Parses the first "ANSWER:" line of a reply.
std::optional<repr::ParsedAction> parse_prediction(std::string_view reply);

// UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace brx::llm
