// SPDX-License-Identifier: Apache-2.0
#include <foampilot/agent/action.hpp>

#include <vector>

namespace foampilot
{

namespace
{

    using nlohmann::json;

    std::optional<json> parse_action_object(std::string_view text)
    {
        auto parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("action"))
            return std::nullopt;
        return parsed;
    }

    std::optional<json> last_fenced_blob(std::string_view text)
    {
        std::vector<std::size_t> fences;
        for (auto pos = text.find("```"); pos != std::string_view::npos; pos = text.find("```", pos + 3))
            fences.push_back(pos);

        std::optional<json> found;
        for (std::size_t i = 0; i + 1 < fences.size(); i += 2)
        {
            auto body = text.substr(fences[i] + 3, fences[i + 1] - fences[i] - 3);
            // Drop an info string such as ```json on the opening line.
            if (auto const nl = body.find('\n'); nl != std::string_view::npos)
            {
                auto const tag = body.substr(0, nl);
                if (tag.find('{') == std::string_view::npos)
                    body.remove_prefix(nl + 1);
            }
            if (auto blob = parse_action_object(body))
                found = std::move(blob);
        }
        return found;
    }

    /// End offset (one past the closing brace) of a balanced object starting at
    /// `open`, honouring JSON string escapes.
    std::optional<std::size_t> matching_brace(std::string_view text, std::size_t open)
    {
        int depth = 0;
        bool inString = false;
        for (auto i = open; i < text.size(); ++i)
        {
            char const c = text[i];
            if (inString)
            {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    inString = false;
                continue;
            }
            if (c == '"')
                inString = true;
            else if (c == '{')
                ++depth;
            else if (c == '}' && --depth == 0)
                return i + 1;
        }
        return std::nullopt;
    }

    std::optional<json> last_bare_blob(std::string_view text)
    {
        std::optional<json> found;
        std::size_t pos = 0;
        while ((pos = text.find('{', pos)) != std::string_view::npos)
        {
            auto const end = matching_brace(text, pos);
            if (!end)
            {
                ++pos;
                continue;
            }
            if (auto blob = parse_action_object(text.substr(pos, *end - pos)))
            {
                found = std::move(blob);
                pos = *end;
            }
            else
                ++pos;
        }
        return found;
    }

} // namespace

std::string input_to_text(nlohmann::json const& input)
{
    if (input.is_string())
        return input.get<std::string>();
    if (input.is_null())
        return {};
    return input.dump();
}

AgentAction parse_action(std::string_view assistantText)
{
    AgentAction action;
    action.raw = std::string(assistantText);

    auto blob = last_fenced_blob(assistantText);
    if (!blob)
        blob = last_bare_blob(assistantText);
    if (!blob)
        return action;

    auto const& name = (*blob)["action"];
    if (!name.is_string() || name.get<std::string>().empty())
        return action;

    auto input = blob->contains("action_input") ? (*blob)["action_input"] : json();
    if (name.get<std::string>() == FinalAnswerAction)
    {
        auto answer = input_to_text(input);
        if (answer.empty())
            return action;
        action.kind = AgentAction::Kind::FinalAnswer;
        action.answer = std::move(answer);
        return action;
    }

    action.kind = AgentAction::Kind::ToolCall;
    action.tool_name = name.get<std::string>();
    action.tool_input = std::move(input);
    return action;
}

} // namespace foampilot
