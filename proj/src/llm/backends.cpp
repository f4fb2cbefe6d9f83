#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "brx/errors.hpp"
#include "brx/hash.hpp"
#include "brx/llm.hpp"

namespace brx::llm {

MockBackend::MockBackend(const std::map<std::string, std::string>& script) {
  for (const auto& [key, reply] : script) script_[key_hash(key)] = reply;
}

std::uint64_t MockBackend::key_hash(std::string_view text) { return sha256_u64(text); }

namespace {

// Line following the last "Action taken by the <role>:" marker, newest message first.
std::optional<std::string> last_action_line(const std::vector<Message>& messages) {
  static const std::string marker = "Action taken by the ";
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    const std::string& text = it->text;
    for (auto pos = text.rfind(marker); pos != std::string::npos;
         pos = pos == 0 ? std::string::npos : text.rfind(marker, pos - 1)) {
      const auto eol = text.find('\n', pos);
      if (eol == std::string::npos) continue;
      auto end = text.find('\n', eol + 1);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(eol + 1, end - eol - 1);
      if (repr::parse_action_line(line)) return line;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string MockBackend::complete(const std::vector<Message>& messages) {
  const Message* last_user = nullptr;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->sender == Sender::User) {
      last_user = &*it;
      break;
    }
  }
  if (last_user) {
    if (auto hit = script_.find(key_hash(last_user->text)); hit != script_.end()) return hit->second;
  }
  const auto line = last_action_line(messages);
  if (!line) return "[mock] No action line found in the conversation.";
  return "[mock] The agent takes this action because of the features listed above.\nANSWER: " + *line;
}

std::optional<HttpChatConfig> HttpChatConfig::from_env() {
  const char* endpoint = std::getenv("BRX_LLM_ENDPOINT");
  if (!endpoint || !*endpoint) return std::nullopt;
  HttpChatConfig c;
  c.endpoint = endpoint;
  if (const char* key = std::getenv("BRX_LLM_API_KEY")) c.api_key = key;
  if (const char* model = std::getenv("BRX_LLM_MODEL"); model && *model) c.model = model;
  if (const char* temp = std::getenv("BRX_LLM_TEMPERATURE"); temp && *temp) {
    try {
      c.temperature = std::stod(temp);
    } catch (const std::exception&) {
      throw ConfigError(std::string("BRX_LLM_TEMPERATURE is not a number: ") + temp);
    }
  }
  return c;
}

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  if (!std::regex_match(config_.endpoint, url)) {
    throw ConfigError("LLM endpoint must be an http(s) URL: '" + config_.endpoint + "'");
  }
  if (config_.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
}

std::string HttpChatBackend::complete(const std::vector<Message>& messages) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  std::regex_match(config_.endpoint, m, url);
  const std::string origin = m[1];
  const std::string path = m[2].matched ? m[2].str() : "/";

  nlohmann::json body{{"model", config_.model}, {"temperature", config_.temperature}};
  body["messages"] = nlohmann::json::array();
  for (const auto& msg : messages) {
    body["messages"].push_back({{"role", to_string(msg.sender)}, {"content", msg.text}});
  }
  const std::string payload = body.dump();

  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "LLM endpoint unreachable: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "LLM endpoint returned HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("LLM endpoint returned HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200),
                         attempt, false);
    }
    try {
      const auto doc = nlohmann::json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed completion response: ") + e.what(), attempt, false);
    }
  }
  throw BackendError(last_error, config_.max_attempts);
}

}  // namespace brx::llm
