#include <ctime>
#include <regex>

#include "brx/errors.hpp"
#include "brx/hash.hpp"
#include "brx/llm.hpp"

namespace brx::llm {

std::string_view to_string(Sender s) {
  switch (s) {
    case Sender::System: return "system";
    case Sender::User: return "user";
    case Sender::Assistant: return "assistant";
  }
  return "?";
}

Sender parse_sender(std::string_view name) {
  for (Sender s : {Sender::System, Sender::User, Sender::Assistant}) {
    if (to_string(s) == name) return s;
  }
  throw FormatError("unknown message sender '" + std::string(name) + "'");
}

ChatSession ChatSession::restore(std::string state_ref, std::string created_at,
                                 std::vector<Message> messages) {
  ChatSession s(std::move(state_ref), std::move(created_at));
  if (messages.empty()) return s;
  if (messages.front().sender != Sender::System) throw FormatError("session must open with a system message");
  if (messages.size() % 2 == 0) throw FormatError("session ends with an unanswered user message");
  for (std::size_t i = 1; i < messages.size(); ++i) {
    const Sender want = i % 2 == 1 ? Sender::User : Sender::Assistant;
    if (messages[i].sender != want) throw FormatError("session messages must alternate user/assistant");
  }
  s.messages_ = std::move(messages);
  return s;
}

void ChatSession::set_system(std::string text) {
  if (!messages_.empty()) throw Error("session already has a system message");
  messages_.push_back({Sender::System, std::move(text)});
}

void ChatSession::append_turn(std::string user_text, std::string assistant_text) {
  if (messages_.empty()) throw Error("session has no system message");
  messages_.reserve(messages_.size() + 2);
  messages_.push_back({Sender::User, std::move(user_text)});
  messages_.push_back({Sender::Assistant, std::move(assistant_text)});
}

namespace {

// History as it will look once the pending user message is appended.
std::vector<Message> with_pending(const std::vector<Message>& history, const std::string& user_text) {
  auto out = history;
  out.push_back({Sender::User, user_text});
  return out;
}

}  // namespace

ExplanationRecord& request_explanation(ExplanationRecord& record, LlmBackend& backend) {
  if (!record.gated) {
    throw GatingError("surrogate action " + std::string(env::to_string(record.tree_action)) +
                      " differs from the expert action " + std::string(env::to_string(record.action)) +
                      "; refusing to explain");
  }
  if (record.explanation_text) return record;

  ChatSession session = record.session;
  if (!session.initialized()) session.set_system(record.prompt.system_text());
  const std::string user = record.prompt.user_text();
  std::string reply = backend.complete(with_pending(session.messages(), user));
  session.append_turn(user, reply);

  record.session = std::move(session);
  record.explanation_text = std::move(reply);
  record.model = backend.metadata().model;
  return record;
}

ExplanationRecord& request_action_prediction(ExplanationRecord& record, LlmBackend& backend) {
  if (!record.explanation_text) throw Error("record " + record.id + " has no explanation yet");
  const std::string user = prediction_prompt(record.role);
  std::string reply = backend.complete(with_pending(record.session.messages(), user));
  record.session.append_turn(user, reply);
  record.predicted_action = parse_prediction(reply);
  record.prediction_text = std::move(reply);
  return record;
}

std::string follow_up(ExplanationRecord& record, const std::string& user_text, LlmBackend& backend) {
  if (!record.session.initialized()) throw Error("record " + record.id + " has no chat session");
  std::string reply = backend.complete(with_pending(record.session.messages(), user_text));
  record.session.append_turn(user_text, reply);
  return reply;
}

std::optional<repr::ParsedAction> parse_prediction(std::string_view reply) {
  static const std::regex answer(R"(^\s*ANSWER:\s*(.*?)\s*$)");
  std::size_t start = 0;
  while (start <= reply.size()) {
    std::size_t end = reply.find('\n', start);
    if (end == std::string_view::npos) end = reply.size();
    const std::string line(reply.substr(start, end - start));
    std::smatch m;
    if (std::regex_match(line, m, answer)) {
      std::string phrase = m[1];
      // Tolerate quoting or markdown emphasis around the phrase.
      while (!phrase.empty() && (phrase.front() == '"' || phrase.front() == '*' || phrase.front() == '`')) {
        phrase.erase(phrase.begin());
      }
      while (!phrase.empty() && (phrase.back() == '"' || phrase.back() == '*' || phrase.back() == '`')) {
        phrase.pop_back();
      }
      return repr::parse_action_line(phrase);
    }
    start = end + 1;
  }
  return std::nullopt;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace brx::llm
