#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace brx {

// Evaluation-state taxonomy: the agent will not reach its goal with this
// action, will reach it with this action, or the state-action is shared by
// Explore and Exploit while their next actions differ.
enum class StateCategory : std::uint8_t { LongTerm, ShortTerm, Ambiguous };

inline constexpr std::array<StateCategory, 3> kAllCategories = {
    StateCategory::LongTerm, StateCategory::ShortTerm, StateCategory::Ambiguous};

std::string_view to_string(StateCategory c);
// "Long-term", "Short-term", "Ambiguous"
std::string_view display_name(StateCategory c);
StateCategory parse_category(std::string_view name);

}  // namespace brx
