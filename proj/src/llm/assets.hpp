#pragma once

namespace brx::llm::assets {

extern const char* const kEnvDescription;
extern const char* const kBrDescription;
extern const char* const kPredictionPrompt;  // contains a {role} placeholder
extern const char* const kIclExamples;       // JSON array

}  // namespace brx::llm::assets
