#pragma once

// JSON encodings for explanation records and their parts.

#include "brx/io.hpp"
#include "brx/llm.hpp"

namespace brx::repr {

void to_json(json& j, const BehaviorRepresentation& br);
void from_json(const json& j, BehaviorRepresentation& br);
void to_json(json& j, const ParsedAction& p);
void from_json(const json& j, ParsedAction& p);

}  // namespace brx::repr

namespace brx::llm {

inline constexpr int kExplanationFormatVersion = 1;

void to_json(json& j, const Message& m);
void from_json(const json& j, Message& m);
void to_json(json& j, const ChatSession& s);
void from_json(const json& j, ChatSession& s);
void to_json(json& j, const PromptBundle& b);
void from_json(const json& j, PromptBundle& b);

json record_to_json(const ExplanationRecord& r);
ExplanationRecord record_from_json(const json& j);

}  // namespace brx::llm
