// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace foampilot
{

inline constexpr std::string_view FinalAnswerAction = "Final Answer";

/// Parsed assistant output.
struct AgentAction
{
    enum class Kind
    {
        ToolCall,
        FinalAnswer,
        Malformed,
    };

    Kind kind = Kind::Malformed;
    std::optional<std::string> tool_name;
    std::optional<nlohmann::json> tool_input;
    std::optional<std::string> answer;
    std::string raw;
};

/// Extracts the action blob from assistant text. The last fenced ``` block
/// holding a JSON object with an "action" key wins; failing that, the last bare
/// JSON object with that key anywhere in the text. Never throws.
[[nodiscard]] AgentAction parse_action(std::string_view assistantText);

/// Renders a tool input for display or for tools that take plain text.
[[nodiscard]] std::string input_to_text(nlohmann::json const& input);

} // namespace foampilot
