// SPDX-License-Identifier: Apache-2.0
#include <foampilot/agent/message.hpp>

#include <algorithm>

namespace foampilot
{

std::string_view to_string(Role role) noexcept
{
    switch (role)
    {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::ToolObservation: return "observation";
    }
    return "unknown";
}

Message::Message(Role role, std::string content):
    _role(role), _content(std::move(content)), _tokenEstimate(estimate_tokens(_content))
{
}

Transcript::Transcript(std::string systemPrompt, std::string userPrompt)
{
    append(Message(Role::System, std::move(systemPrompt)));
    append(Message(Role::User, std::move(userPrompt)));
}

void Transcript::append(Message message)
{
    _totalTokens += message.token_estimate();
    _messages.push_back(std::move(message));
}

std::size_t Transcript::count(Role role) const noexcept
{
    return static_cast<std::size_t>(
        std::ranges::count_if(_messages, [role](Message const& m) { return m.role() == role; }));
}

} // namespace foampilot
